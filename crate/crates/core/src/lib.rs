//! Electrical-network experiments on random graphs.
//!
//! The crate builds random graphs (sparse Erdos-Renyi, rings, ring-plus-chords),
//! weights their edges with positive conductances, and studies the potential a
//! handful of pinned boundary vertices induces on the rest of the network:
//!
//! * [`solver`] computes the interior potential (conductance-weighted
//!   Gauss-Seidel, plus an independent dense-elimination route for
//!   cross-checking) and audits current conservation.
//! * [`walk`] estimates the same potentials through first-hit statistics of
//!   conductance-biased random walks, and measures mixing on the
//!   boundary-removed network.
//! * [`properness`] audits the structural conditions (connectivity, cycle
//!   spacing, odd cycles, conductance expansion, degree band) under which the
//!   interior potential concentrates around a single computable constant.
//! * [`concentration`] computes that constant, deviation statistics, and a
//!   leader-follower averaging process that converges to the same field.
//!
//! Everything randomized is driven by explicit 64-bit seeds through ChaCha8
//! ([`rng`]), so identical inputs produce identical outputs on any platform.
//! The crate is `no_std`-compatible (with `alloc`); file formats, experiment
//! orchestration, and the command-line interface live in the companion
//! `volta` crate.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod concentration;
mod error;
pub mod generate;
pub mod graph;
mod math;
pub mod network;
pub mod properness;
pub mod rng;
pub mod solver;
pub mod walk;

pub use error::{Error, Result};
pub use generate::{generate, GenKind, GenSpec};
pub use graph::{ComponentLabeling, Graph};
pub use network::{ConductanceScheme, Network, SchemeKind};
pub use solver::{BoundaryCondition, PotentialField};

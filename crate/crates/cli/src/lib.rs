//! Experiment harness around `volta-core`: on-disk formats, TOML configs,
//! builtin recipes, and the staged pipeline that turns a config into a
//! directory of reproducible artifacts with a checksummed manifest.

pub mod config;
pub mod experiment;
pub mod formats;
pub mod manifest;
pub mod recipes;
pub mod report;

pub use config::ExperimentConfig;
pub use experiment::{run_experiment, sweep, RunRecord, SweepRun};
pub use manifest::RunManifest;

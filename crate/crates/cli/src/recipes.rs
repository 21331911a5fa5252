//! Builtin experiment recipes: three graph families times three conductance
//! schemes, all on 1000 vertices with the boundary pinned at vertices
//! 1, 251, 501, 751 (1-based) to potentials 1.0, 0.3, 0.7, 1.0.
//!
//! `fig1-*` is the circle (no concentration), `fig2-*` is gnp with p = 0.01
//! (concentration near the weighted boundary mean), `fig3-*` is the circle
//! plus a sparse gnp overlay with p = 0.001 (intermediate). Each recipe is
//! one draw with a fixed master seed; pass a different seed to resample.

use volta_core::generate::GenKind;
use volta_core::network::SchemeKind;

use crate::config::{
    BoundarySection, ConductanceSection, ExperimentConfig, ExperimentSection, GeneratorSection,
    Placement, QUARTER_POTENTIALS,
};

pub const RECIPE_NAMES: [&str; 9] = [
    "fig1-unit",
    "fig1-uniform01",
    "fig1-powerlaw",
    "fig2-unit",
    "fig2-uniform01",
    "fig2-powerlaw",
    "fig3-unit",
    "fig3-uniform01",
    "fig3-powerlaw",
];

pub fn recipe(name: &str) -> Option<ExperimentConfig> {
    let (figure, scheme_name) = name.split_once('-')?;
    let (kind, p) = match figure {
        "fig1" => (GenKind::Circle, None),
        "fig2" => (GenKind::Gnp, Some(0.01)),
        "fig3" => (GenKind::SmallWorld, Some(0.001)),
        _ => return None,
    };
    let (scheme, seed_slot) = match scheme_name {
        "unit" => (SchemeKind::Unit, 1),
        "uniform01" => (SchemeKind::Uniform01, 2),
        "powerlaw" => (SchemeKind::PowerLaw, 3),
        _ => return None,
    };
    let figure_slot: u64 = figure[3..].parse().ok()?;
    let mut cfg = ExperimentConfig {
        experiment: ExperimentSection {
            name: name.to_string(),
            // fixed per recipe so a bare `run --recipe` is reproducible
            seed: 1000 + figure_slot * 100 + seed_slot,
        },
        generator: GeneratorSection { kind, n: 1000, p, alpha: None },
        conductance: ConductanceSection::default(),
        boundary: BoundarySection {
            placement: Placement::Quarters,
            potentials: Some(QUARTER_POTENTIALS.to_vec()),
            pins: None,
        },
        solver: Default::default(),
        walk: Default::default(),
        mixing: Default::default(),
        properness: Default::default(),
        stats: Default::default(),
        consensus: Default::default(),
    };
    cfg.conductance.scheme = scheme;
    Some(cfg)
}

//! Experiment configuration: a TOML file with one section per pipeline
//! stage. Parsing is strict (unknown keys are errors) and serialization is
//! lossless, so a config can be round-tripped through disk and reproduce
//! the same experiment bit for bit.

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use volta_core::generate::{GenKind, GenSpec};
use volta_core::network::{ConductanceScheme, SchemeKind, DEFAULT_EPSILON, DEFAULT_GAMMA};
use volta_core::rng::derive_seed;
use volta_core::solver::{DEFAULT_MAX_ITER, DEFAULT_TOL};
use volta_core::walk::{DEFAULT_MIXING_FACTOR, DEFAULT_MIXING_SAMPLES, DEFAULT_STEP_BUDGET};
use volta_core::BoundaryCondition;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentSection,
    pub generator: GeneratorSection,
    #[serde(default)]
    pub conductance: ConductanceSection,
    pub boundary: BoundarySection,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default)]
    pub walk: WalkSection,
    #[serde(default)]
    pub mixing: MixingSection,
    #[serde(default)]
    pub properness: PropernessSection,
    #[serde(default)]
    pub stats: StatsSection,
    #[serde(default)]
    pub consensus: ConsensusSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSection {
    pub name: String,
    /// Master seed; every stage derives its own stream from it.
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorSection {
    pub kind: GenKind,
    pub n: usize,
    /// Edge probability. Alternatively give `alpha` and the probability
    /// becomes `alpha ln n / n`; exactly one of the two for random models,
    /// neither for `circle`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConductanceSection {
    pub scheme: SchemeKind,
    pub gamma: f64,
    pub epsilon: f64,
}

impl Default for ConductanceSection {
    fn default() -> Self {
        ConductanceSection { scheme: SchemeKind::Unit, gamma: DEFAULT_GAMMA, epsilon: DEFAULT_EPSILON }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Placement {
    /// Four pins at vertices 1, n/4+1, n/2+1, 3n/4+1 (1-based), one
    /// potential per pin.
    Quarters,
    /// Pins listed one by one.
    Explicit,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PinSpec {
    /// 1-based vertex label, as everywhere in external IO.
    pub vertex: usize,
    pub potential: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundarySection {
    pub placement: Placement,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub potentials: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pins: Option<Vec<PinSpec>>,
}

pub const QUARTER_POTENTIALS: [f64; 4] = [1.0, 0.3, 0.7, 1.0];

/// Resolves the `p`-versus-`alpha` alternative: random models take exactly
/// one of the two (with `p = alpha ln n / n`), the circle takes neither.
pub fn resolve_probability(kind: GenKind, n: usize, p: Option<f64>, alpha: Option<f64>) -> Result<f64> {
    match (kind, p, alpha) {
        (GenKind::Circle, None, None) => Ok(0.0),
        (GenKind::Circle, _, _) => bail!("circle takes neither p nor alpha"),
        (_, Some(p), None) => Ok(p),
        (_, None, Some(a)) => {
            let n = n as f64;
            Ok(a * n.ln() / n)
        }
        (_, Some(_), Some(_)) => bail!("give p or alpha, not both"),
        (kind, None, None) => bail!("{kind:?} needs p or alpha"),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSection {
    pub tol: f64,
    pub max_iter: usize,
    /// Cross-check the iterative solve against direct elimination when the
    /// interior is small enough; disagreement fails the solve stage.
    pub dense_check: bool,
}

impl Default for SolverSection {
    fn default() -> Self {
        SolverSection { tol: DEFAULT_TOL, max_iter: DEFAULT_MAX_ITER, dense_check: false }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WalkSection {
    pub enabled: bool,
    pub walks_per_vertex: usize,
    pub step_budget: u64,
}

impl Default for WalkSection {
    fn default() -> Self {
        WalkSection { enabled: false, walks_per_vertex: 200, step_budget: DEFAULT_STEP_BUDGET }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MixingSection {
    pub enabled: bool,
    pub factor: f64,
    pub samples: usize,
}

impl Default for MixingSection {
    fn default() -> Self {
        MixingSection { enabled: false, factor: DEFAULT_MIXING_FACTOR, samples: DEFAULT_MIXING_SAMPLES }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PropernessSection {
    pub enabled: bool,
    pub exhaustive_cap: usize,
    pub samples: usize,
    pub delta: f64,
    /// Degree-band coefficient c in the (delta c ln n, 4 c ln n) window.
    /// Defaults to p n / ln n when the generator pins down p; without it
    /// the degree check is skipped.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coefficient: Option<f64>,
}

impl Default for PropernessSection {
    fn default() -> Self {
        PropernessSection {
            enabled: false,
            exhaustive_cap: volta_core::properness::DEFAULT_EXHAUSTIVE_CAP,
            samples: volta_core::properness::DEFAULT_EXPANSION_SAMPLES,
            delta: volta_core::properness::DEFAULT_DELTA,
            coefficient: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StatsSection {
    pub bins: usize,
}

impl Default for StatsSection {
    fn default() -> Self {
        StatsSection { bins: volta_core::concentration::DEFAULT_BINS }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConsensusSection {
    pub enabled: bool,
    pub tol: f64,
    pub max_steps: usize,
}

impl Default for ConsensusSection {
    fn default() -> Self {
        ConsensusSection { enabled: false, tol: DEFAULT_TOL, max_steps: DEFAULT_MAX_ITER }
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).context("parsing experiment config")
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string_pretty(self).context("serializing experiment config")
    }

    /// Edge probability after resolving the `p`/`alpha` alternative.
    pub fn edge_probability(&self) -> Result<f64> {
        let g = &self.generator;
        resolve_probability(g.kind, g.n, g.p, g.alpha)
    }

    pub fn gen_spec(&self) -> Result<GenSpec> {
        let p = self.edge_probability()?;
        let seed = derive_seed(self.experiment.seed, "generate");
        Ok(GenSpec { kind: self.generator.kind, n: self.generator.n, p, seed })
    }

    pub fn conductance_scheme(&self) -> ConductanceScheme {
        ConductanceScheme {
            kind: self.conductance.scheme,
            seed: derive_seed(self.experiment.seed, "conductance"),
            gamma: self.conductance.gamma,
            epsilon: self.conductance.epsilon,
        }
    }

    pub fn boundary_condition(&self) -> Result<BoundaryCondition> {
        let b = &self.boundary;
        let pins: Vec<(usize, f64)> = match b.placement {
            Placement::Quarters => {
                if b.pins.is_some() {
                    bail!("quarters placement does not take explicit pins");
                }
                let pots = b.potentials.clone().unwrap_or_else(|| QUARTER_POTENTIALS.to_vec());
                if pots.len() != 4 {
                    bail!("quarters placement needs exactly 4 potentials, got {}", pots.len());
                }
                let n = self.generator.n;
                (0..4).map(|i| (i * n / 4, pots[i])).collect()
            }
            Placement::Explicit => {
                if b.potentials.is_some() {
                    bail!("explicit placement takes pins, not a potentials list");
                }
                let pins = b.pins.as_ref().context("explicit placement needs pins")?;
                pins.iter()
                    .map(|ps| {
                        if ps.vertex == 0 {
                            bail!("pin vertices are 1-based; 0 is not a vertex");
                        }
                        Ok((ps.vertex - 1, ps.potential))
                    })
                    .collect::<Result<_>>()?
            }
        };
        Ok(BoundaryCondition::new(pins)?)
    }

    /// Degree-band coefficient: explicit value, else p n / ln n when the
    /// generator has an edge probability, else none.
    pub fn degree_coefficient(&self) -> Result<Option<f64>> {
        if let Some(c) = self.properness.coefficient {
            return Ok(Some(c));
        }
        if self.generator.kind == GenKind::Circle {
            return Ok(None);
        }
        let n = self.generator.n as f64;
        Ok(Some(self.edge_probability()? * n / n.ln()))
    }

    /// Sets the numeric field named by a sweep axis. `n` must be a whole
    /// number; `p` and `alpha` displace each other.
    pub fn apply_axis(&mut self, axis: &str, value: f64) -> Result<()> {
        match axis {
            "n" => {
                if !(value.is_finite() && value >= 3.0 && value.fract() == 0.0) {
                    bail!("axis n needs a whole number of at least 3, got {value}");
                }
                self.generator.n = value as usize;
            }
            "p" => {
                self.generator.p = Some(value);
                self.generator.alpha = None;
            }
            "alpha" => {
                self.generator.alpha = Some(value);
                self.generator.p = None;
            }
            "gamma" => self.conductance.gamma = value,
            "epsilon" => self.conductance.epsilon = value,
            other => bail!("unknown sweep axis {other:?} (expected n, p, alpha, gamma, or epsilon)"),
        }
        Ok(())
    }
}

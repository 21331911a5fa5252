//! Conductance-weighted random walks and their estimators.
//!
//! From vertex i the walk moves to neighbor j with probability c_ij / c_i.
//! Absorption walks stopped at a pinned boundary estimate hitting
//! probabilities, and through them the potential field: the potential at i
//! equals the expected pinned value at the first boundary vertex hit. This
//! gives a second, solver-independent route to the field.
//!
//! Every walk draws from its own deterministic substream keyed by
//! `(start vertex, walk index)`, so estimates are reproducible and
//! independent of scheduling.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::math;
use crate::network::Network;
use crate::rng::{derive_seed, substream};
use crate::solver::{BoundaryCondition, Dirichlet};

/// Total steps across all walks of one estimation call.
pub const DEFAULT_STEP_BUDGET: u64 = 1_000_000_000;
/// Multiplier on ln n for the mixing horizon.
pub const DEFAULT_MIXING_FACTOR: f64 = 10.0;
/// Walks per mixing diagnostic.
pub const DEFAULT_MIXING_SAMPLES: usize = 2_000;

/// Sampling tables for the conductance-weighted walk: per vertex, the
/// cumulative conductance over its incident edges in neighbor order.
pub struct TransitionModel<'a> {
    net: &'a Network,
    cumulative: Vec<Vec<f64>>,
}

impl<'a> TransitionModel<'a> {
    pub fn new(net: &'a Network) -> Self {
        let cumulative = (0..net.vertex_count())
            .map(|v| {
                let mut acc = 0.0;
                net.incident(v)
                    .iter()
                    .map(|&(_, e)| {
                        acc += net.conductances()[e];
                        acc
                    })
                    .collect()
            })
            .collect();
        TransitionModel { net, cumulative }
    }

    /// One step from `v`: each incident edge is chosen with probability
    /// proportional to its conductance.
    pub fn step(&self, v: usize, rng: &mut ChaCha8Rng) -> Result<usize> {
        let cum = &self.cumulative[v];
        let total = match cum.last() {
            Some(&t) => t,
            None => return Err(Error::IsolatedVertex { vertex: v }),
        };
        let u = rng.gen::<f64>() * total;
        // Rounding can push u to the table's end; the final slot absorbs it.
        let slot = cum.partition_point(|&c| c <= u).min(cum.len() - 1);
        Ok(self.net.incident(v)[slot].0)
    }

    /// Exact single-step probability from `i` to `j`.
    pub fn probability(&self, i: usize, j: usize) -> Result<f64> {
        self.net.graph().check_vertex(i)?;
        self.net.graph().check_vertex(j)?;
        let strength = self.net.strength(i)?;
        Ok(self.net.conductance_between(i, j).unwrap_or(0.0) / strength)
    }
}

/// Absorption-walk tallies: `counts[v * k + j]` walks from `v` were first
/// absorbed at the j-th boundary vertex. Rows of undefined vertices are zero.
#[derive(Debug, Clone, PartialEq)]
pub struct HittingEstimate {
    pub boundary: Vec<usize>,
    pub potentials: Vec<f64>,
    pub walks_per_vertex: usize,
    pub counts: Vec<u64>,
    pub defined: Vec<bool>,
    pub total_steps: u64,
}

impl HittingEstimate {
    pub fn boundary_count(&self) -> usize {
        self.boundary.len()
    }

    /// Estimated probability that a walk from `v` first hits the j-th
    /// boundary vertex; NaN where the field is undefined.
    pub fn probability(&self, v: usize, j: usize) -> f64 {
        if !self.defined[v] {
            return f64::NAN;
        }
        self.counts[v * self.boundary.len() + j] as f64 / self.walks_per_vertex as f64
    }

    /// Binomial standard error of `probability(v, j)`.
    pub fn std_error(&self, v: usize, j: usize) -> f64 {
        let p = self.probability(v, j);
        math::sqrt(p * (1.0 - p) / self.walks_per_vertex as f64)
    }

    /// Duality estimate of the potential at `v`: pinned values averaged
    /// under the hitting distribution.
    pub fn potential_estimate(&self, v: usize) -> f64 {
        if !self.defined[v] {
            return f64::NAN;
        }
        (0..self.boundary.len())
            .map(|j| self.potentials[j] * self.probability(v, j))
            .sum()
    }

    /// Standard error of `potential_estimate(v)`: sample variance of the
    /// one-walk payoff over `walks_per_vertex` walks.
    pub fn potential_std_error(&self, v: usize) -> f64 {
        if !self.defined[v] {
            return f64::NAN;
        }
        let mean = self.potential_estimate(v);
        let second: f64 = (0..self.boundary.len())
            .map(|j| self.potentials[j] * self.potentials[j] * self.probability(v, j))
            .sum();
        let var = (second - mean * mean).max(0.0);
        math::sqrt(var / self.walks_per_vertex as f64)
    }
}

/// Estimates hitting probabilities from every defined vertex with the
/// default step budget.
pub fn hitting_probabilities(
    net: &Network,
    bc: &BoundaryCondition,
    walks_per_vertex: usize,
    seed: u64,
) -> Result<HittingEstimate> {
    hitting_probabilities_with_budget(net, bc, walks_per_vertex, seed, DEFAULT_STEP_BUDGET)
}

/// As [`hitting_probabilities`], but fails with `BudgetExceeded` once the
/// walks have taken `budget` steps in total.
pub fn hitting_probabilities_with_budget(
    net: &Network,
    bc: &BoundaryCondition,
    walks_per_vertex: usize,
    seed: u64,
    budget: u64,
) -> Result<HittingEstimate> {
    check_walk_counts(net, walks_per_vertex)?;
    let d = Dirichlet::prepare(net, bc)?;
    let model = TransitionModel::new(net);
    let bidx = boundary_index(net, bc);
    let k = bc.len();
    let n = net.vertex_count();
    let mut counts = vec![0u64; n * k];
    let mut total_steps = 0u64;
    for v in 0..n {
        if !d.defined[v] {
            continue;
        }
        run_walks(
            &model,
            &bidx,
            v,
            walks_per_vertex,
            seed,
            budget,
            &mut total_steps,
            &mut counts[v * k..(v + 1) * k],
        )?;
    }
    Ok(HittingEstimate {
        boundary: bc.vertices().to_vec(),
        potentials: bc.potentials().to_vec(),
        walks_per_vertex,
        counts,
        defined: d.defined,
        total_steps,
    })
}

/// Absorption walks from a single start vertex; returns per-boundary-vertex
/// first-hit counts and the steps consumed. With the same seed this
/// reproduces exactly the `start` row of [`hitting_probabilities`].
pub fn hitting_from(
    net: &Network,
    bc: &BoundaryCondition,
    start: usize,
    walks: usize,
    seed: u64,
    budget: u64,
) -> Result<(Vec<u64>, u64)> {
    check_walk_counts(net, walks)?;
    let d = Dirichlet::prepare(net, bc)?;
    net.graph().check_vertex(start)?;
    if !d.defined[start] {
        return Err(Error::UndefinedStart { vertex: start });
    }
    let model = TransitionModel::new(net);
    let bidx = boundary_index(net, bc);
    let mut counts = vec![0u64; bc.len()];
    let mut steps = 0u64;
    run_walks(&model, &bidx, start, walks, seed, budget, &mut steps, &mut counts)?;
    Ok((counts, steps))
}

#[allow(clippy::too_many_arguments)]
fn run_walks(
    model: &TransitionModel<'_>,
    bidx: &[usize],
    start: usize,
    walks: usize,
    seed: u64,
    budget: u64,
    total_steps: &mut u64,
    counts: &mut [u64],
) -> Result<()> {
    if bidx[start] != usize::MAX {
        // A walk started on the boundary is absorbed where it stands.
        counts[bidx[start]] += walks as u64;
        return Ok(());
    }
    for w in 0..walks {
        let mut rng = substream(seed, ((start as u64) << 32) | w as u64);
        let mut cur = start;
        loop {
            if *total_steps >= budget {
                return Err(Error::BudgetExceeded { budget });
            }
            cur = model.step(cur, &mut rng)?;
            *total_steps += 1;
            if bidx[cur] != usize::MAX {
                counts[bidx[cur]] += 1;
                break;
            }
        }
    }
    Ok(())
}

fn boundary_index(net: &Network, bc: &BoundaryCondition) -> Vec<usize> {
    let mut bidx = vec![usize::MAX; net.vertex_count()];
    for (j, &x) in bc.vertices().iter().enumerate() {
        bidx[x] = j;
    }
    bidx
}

fn check_walk_counts(net: &Network, walks: usize) -> Result<()> {
    if walks == 0 {
        return Err(Error::Argument(String::from("walks per vertex must be positive")));
    }
    // Substream ids pack (vertex, walk) into 32 bits each.
    if walks as u64 > u32::MAX as u64 || net.vertex_count() as u64 > u32::MAX as u64 {
        return Err(Error::Argument(String::from(
            "walk or vertex counts beyond 2^32 are not supported",
        )));
    }
    Ok(())
}

/// Why a mixing diagnostic could not measure a total-variation distance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MixingApplicability {
    Applicable,
    /// Removing the excluded set left no vertices to walk on.
    ResidualEmpty,
    ResidualDisconnected,
    /// A bipartite residual walk has no limiting distribution to compare to.
    ResidualBipartite,
}

/// Empirical mixing diagnostic at horizon `2 * t0`, `t0 = ceil(factor ln n)`.
///
/// `tv_distance` compares, on the network with `excluded` removed, the
/// endpoint distribution of walks from `start` against the stationary law
/// (strength over total strength). `escape_prob` is measured on the full
/// network: the fraction of walks from `start` that avoid `excluded`
/// entirely for the whole horizon.
#[derive(Debug, Clone, PartialEq)]
pub struct MixingReport {
    pub t0: usize,
    pub steps: usize,
    pub samples: usize,
    pub start: usize,
    pub tv_distance: Option<f64>,
    pub escape_prob: f64,
    pub applicability: MixingApplicability,
}

pub fn mixing_diagnostics(
    net: &Network,
    excluded: &[usize],
    factor: f64,
    samples: usize,
    seed: u64,
) -> Result<MixingReport> {
    if !(factor.is_finite() && factor > 0.0) {
        return Err(Error::Argument(format_arg("mixing factor", factor)));
    }
    if samples == 0 {
        return Err(Error::Argument(String::from("mixing needs at least one sample walk")));
    }
    let n = net.vertex_count();
    let mut dropped = vec![false; n];
    for &v in excluded {
        net.graph().check_vertex(v)?;
        dropped[v] = true;
    }
    let start = match (0..n).find(|&v| !dropped[v]) {
        Some(v) => v,
        None => {
            return Err(Error::Argument(String::from(
                "every vertex is excluded; nothing to walk on",
            )))
        }
    };
    let t0 = math::ceil(factor * math::ln(n as f64)) as usize;
    let steps = 2 * t0;

    let escape_prob = if excluded.is_empty() {
        1.0
    } else {
        let model = TransitionModel::new(net);
        let escape_seed = derive_seed(seed, "mixing/escape");
        let mut escaped = 0usize;
        for w in 0..samples {
            let mut rng = substream(escape_seed, w as u64);
            let mut cur = start;
            let mut safe = true;
            for _ in 0..steps {
                cur = model.step(cur, &mut rng)?;
                if dropped[cur] {
                    safe = false;
                    break;
                }
            }
            if safe {
                escaped += 1;
            }
        }
        escaped as f64 / samples as f64
    };

    let (residual, to_parent) = net.without_vertices(excluded)?;
    let applicability = if residual.graph().edge_count() == 0 {
        MixingApplicability::ResidualEmpty
    } else if !residual.graph().is_connected() {
        MixingApplicability::ResidualDisconnected
    } else if residual.graph().is_bipartite() {
        MixingApplicability::ResidualBipartite
    } else {
        MixingApplicability::Applicable
    };
    let tv_distance = if applicability == MixingApplicability::Applicable {
        let local_start = to_parent.binary_search(&start).expect("start survives exclusion");
        let model = TransitionModel::new(&residual);
        let tv_seed = derive_seed(seed, "mixing/tv");
        let mut occupancy = vec![0u64; residual.vertex_count()];
        for w in 0..samples {
            let mut rng = substream(tv_seed, w as u64);
            let mut cur = local_start;
            for _ in 0..steps {
                cur = model.step(cur, &mut rng)?;
            }
            occupancy[cur] += 1;
        }
        let total_strength: f64 = residual.strengths_raw().iter().sum();
        let mut tv = 0.0;
        for v in 0..residual.vertex_count() {
            let empirical = occupancy[v] as f64 / samples as f64;
            let stationary = residual.strengths_raw()[v] / total_strength;
            tv += math::abs(empirical - stationary);
        }
        Some(tv / 2.0)
    } else {
        None
    };

    Ok(MixingReport { t0, steps, samples, start, tv_distance, escape_prob, applicability })
}

fn format_arg(what: &str, value: f64) -> String {
    alloc::format!("{what} must be positive and finite, got {value}")
}

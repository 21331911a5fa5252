//! Seeded random-graph generators.
//!
//! `Gnp` draws a sparse Erdos-Renyi graph by geometric skipping over the
//! ranked pair space, so cost is O(n + m) rather than O(n^2). `Circle` is the
//! deterministic n-cycle. `SmallWorld` is the union of the circle with an
//! independent Gnp draw, duplicate pairs collapsed.

use alloc::format;
use alloc::vec::Vec;

use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::math;
use crate::rng::{derive_seed, rng_from};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum GenKind {
    Gnp,
    Circle,
    SmallWorld,
}

/// A fully reproducible generation request: identical specs yield identical
/// graphs on every platform.
#[derive(Debug, Clone, PartialEq)]
pub struct GenSpec {
    pub kind: GenKind,
    pub n: usize,
    /// Edge probability; ignored by `Circle`.
    pub p: f64,
    pub seed: u64,
}

impl GenSpec {
    pub fn gnp(n: usize, p: f64, seed: u64) -> Self {
        GenSpec { kind: GenKind::Gnp, n, p, seed }
    }

    pub fn circle(n: usize) -> Self {
        GenSpec { kind: GenKind::Circle, n, p: 0.0, seed: 0 }
    }

    pub fn small_world(n: usize, p: f64, seed: u64) -> Self {
        GenSpec { kind: GenKind::SmallWorld, n, p, seed }
    }

    fn validate(&self) -> Result<()> {
        if self.n < 3 {
            return Err(Error::Argument(format!(
                "generator needs at least 3 vertices, got {}",
                self.n
            )));
        }
        if self.kind != GenKind::Circle && !(0.0..=1.0).contains(&self.p) {
            return Err(Error::Argument(format!(
                "edge probability must lie in [0, 1], got {}",
                self.p
            )));
        }
        Ok(())
    }
}

pub fn generate(spec: &GenSpec) -> Result<Graph> {
    spec.validate()?;
    let edges = match spec.kind {
        GenKind::Gnp => gnp_edges(spec.n, spec.p, spec.seed),
        GenKind::Circle => circle_edges(spec.n),
        GenKind::SmallWorld => {
            let mut edges = circle_edges(spec.n);
            edges.extend(gnp_edges(spec.n, spec.p, spec.seed));
            edges.sort_unstable();
            edges.dedup();
            edges
        }
    };
    Graph::new(spec.n, edges)
}

fn circle_edges(n: usize) -> Vec<(usize, usize)> {
    (0..n).map(|i| if i + 1 < n { (i, i + 1) } else { (0, n - 1) }).collect()
}

/// Each of the n(n-1)/2 vertex pairs is included independently with
/// probability p. Pairs are ranked lexicographically and the generator jumps
/// between included ranks with geometric skips, touching only accepted pairs.
fn gnp_edges(n: usize, p: f64, seed: u64) -> Vec<(usize, usize)> {
    let pair_count = (n as u64) * (n as u64 - 1) / 2;
    let mut edges = Vec::new();
    if p <= 0.0 {
        return edges;
    }
    if p >= 1.0 {
        for i in 0..n {
            for j in i + 1..n {
                edges.push((i, j));
            }
        }
        return edges;
    }
    let mut rng = rng_from(seed);
    let ln_q = math::ln(1.0 - p);
    let mut next: u64 = 0;
    loop {
        // Skip = number of rejected pairs before the next accepted one.
        let u: f64 = rng.gen();
        let skip = math::floor(math::ln(1.0 - u) / ln_q);
        if skip >= (pair_count - next) as f64 {
            break;
        }
        next += skip as u64;
        edges.push(unrank_pair(n, next));
        next += 1;
        if next >= pair_count {
            break;
        }
    }
    edges
}

/// Inverse of the lexicographic pair ranking: rank 0 is (0,1), rank 1 is
/// (0,2), ..., rank n(n-1)/2 - 1 is (n-2, n-1).
fn unrank_pair(n: usize, rank: u64) -> (usize, usize) {
    let nf = n as u64;
    // Rank of the first pair in row i is T(i) = i*(2n - i - 1)/2; invert the
    // quadratic in floats, then correct for rounding exactly.
    let row_start = |i: u64| i * (2 * nf - i - 1) / 2;
    let approx = (2.0 * nf as f64 - 1.0
        - math::sqrt((2.0 * nf as f64 - 1.0) * (2.0 * nf as f64 - 1.0) - 8.0 * rank as f64))
        / 2.0;
    let mut i = math::floor(approx).max(0.0) as u64;
    i = i.min(nf - 2);
    while row_start(i) > rank {
        i -= 1;
    }
    while i + 1 <= nf - 2 && row_start(i + 1) <= rank {
        i += 1;
    }
    let j = i + 1 + (rank - row_start(i));
    (i as usize, j as usize)
}

/// Empirical acceptance frequency for a deterministic sample of vertex pairs,
/// re-generating the graph `trials` times with per-trial seeds derived from
/// the spec seed. Useful for auditing that the generator hits its nominal p.
pub fn edge_probability_audit(
    spec: &GenSpec,
    trials: u32,
) -> Result<Vec<((usize, usize), f64)>> {
    spec.validate()?;
    if trials == 0 {
        return Err(Error::Argument(alloc::string::String::from(
            "trials must be positive",
        )));
    }
    let pair_count = (spec.n as u64) * (spec.n as u64 - 1) / 2;
    let mut ranks: Vec<u64> = (0..8)
        .map(|k| ((pair_count - 1) as u128 * k as u128 / 7) as u64)
        .collect();
    ranks.dedup();
    let pairs: Vec<(usize, usize)> = ranks.iter().map(|&r| unrank_pair(spec.n, r)).collect();

    let base = derive_seed(spec.seed, "edge-probability-audit");
    let mut hits = alloc::vec![0u64; pairs.len()];
    for t in 0..trials {
        let mut trial_spec = spec.clone();
        trial_spec.seed = base.wrapping_add(t as u64);
        let g = generate(&trial_spec)?;
        for (slot, &(a, b)) in pairs.iter().enumerate() {
            if g.has_edge(a, b) {
                hits[slot] += 1;
            }
        }
    }
    Ok(pairs
        .into_iter()
        .zip(hits)
        .map(|(pair, h)| (pair, h as f64 / trials as f64))
        .collect())
}

//! Structural health checks for random networks.
//!
//! A network is a good host for potential concentration when it is connected,
//! its short cycles are rare and far apart, odd cycles of small length exist
//! (so walks are aperiodic), every small vertex set leaks a constant fraction
//! of its conductance, and degrees stay within a logarithmic band. Each check
//! here returns a verdict plus, on failure, a concrete witness that can be
//! re-evaluated independently.
//!
//! The expansion check is exhaustive over small subsets and sampled beyond
//! that; its `SampledHolds` verdict is deliberately weaker than `Holds`.
//! Sampling can miss structured cuts (a long arc of a circle, say), so a
//! clean sampled run is evidence, not proof.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::math;
use crate::network::Network;
use crate::rng::rng_from;

/// Degree-band slack: lower edge sits at `delta` times the upper edge's
/// quarter.
pub const DEFAULT_DELTA: f64 = 0.1;
/// Subset sizes checked exhaustively by the expansion check.
pub const DEFAULT_EXHAUSTIVE_CAP: usize = 2;
/// Random subsets drawn beyond the exhaustive sizes.
pub const DEFAULT_EXPANSION_SAMPLES: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Holds,
    /// No violation among the subsets actually examined; not a proof.
    SampledHolds,
    Fails,
    /// The check had nothing to measure (for instance, every vertex was
    /// excluded).
    Inapplicable,
}

/// Concrete evidence for a failed check, in original vertex ids.
#[derive(Debug, Clone, PartialEq)]
pub enum Witness {
    Disconnected { components: usize },
    CloseCycles { first: Vec<usize>, second: Vec<usize>, distance: usize },
    MissingCycleLength { length: usize },
    LowExpansion { subset: Vec<usize>, ratio: f64, bound: f64 },
    DegreeOutOfBand { vertex: usize, degree: usize, low: f64, high: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropertyCheck {
    pub verdict: Verdict,
    pub witness: Option<Witness>,
}

impl PropertyCheck {
    fn holds_with(verdict: Verdict) -> Self {
        PropertyCheck { verdict, witness: None }
    }

    fn fails(witness: Witness) -> Self {
        PropertyCheck { verdict: Verdict::Fails, witness: Some(witness) }
    }

    /// True for both the proven and the sampled flavor of a pass.
    pub fn holds(&self) -> bool {
        matches!(self.verdict, Verdict::Holds | Verdict::SampledHolds)
    }
}

/// Size-derived thresholds for the cycle-separation check: cycles of length
/// at most `floor(ln n / (10 ln ln n))` must sit at pairwise distance at
/// least `ceil(ln n / ln ln n)`. At practical sizes the length cap is 0 and
/// the check is vacuous; it bites only on astronomically large networks.
pub fn structure_thresholds(n: usize) -> Result<(usize, usize)> {
    if n < 3 {
        return Err(Error::Argument(String::from(
            "size thresholds need at least 3 vertices",
        )));
    }
    let ln_n = math::ln(n as f64);
    let ln_ln_n = math::ln(ln_n);
    let cap = math::floor(ln_n / (10.0 * ln_ln_n)) as usize;
    let separation = math::ceil(ln_n / ln_ln_n) as usize;
    Ok((cap, separation))
}

pub fn check_connectivity(graph: &Graph) -> PropertyCheck {
    let components = graph.components().count();
    if components == 1 {
        PropertyCheck::holds_with(Verdict::Holds)
    } else {
        PropertyCheck::fails(Witness::Disconnected { components })
    }
}

/// Every pair of distinct cycles with length at most `cap` must lie at
/// graph distance at least `separation`. A `cap` below 3 admits no cycles
/// and holds vacuously. Cycles in different components are infinitely far
/// apart and never conflict.
pub fn check_cycle_separation(graph: &Graph, cap: usize, separation: usize) -> Result<PropertyCheck> {
    if cap < 3 {
        return Ok(PropertyCheck::holds_with(Verdict::Holds));
    }
    let cycles = graph.cycles_up_to(cap)?;
    for (i, first) in cycles.iter().enumerate() {
        for second in &cycles[i + 1..] {
            if let Some(d) = graph.min_distance_between(first, second)? {
                if d < separation {
                    return Ok(PropertyCheck::fails(Witness::CloseCycles {
                        first: first.clone(),
                        second: second.clone(),
                        distance: d,
                    }));
                }
            }
        }
    }
    Ok(PropertyCheck::holds_with(Verdict::Holds))
}

/// Cycles of length 3, 5 and 7 must all exist somewhere in the graph.
pub fn check_odd_cycles(graph: &Graph) -> Result<PropertyCheck> {
    for length in [3usize, 5, 7] {
        if graph.cycle_of_length(length)?.is_none() {
            return Ok(PropertyCheck::fails(Witness::MissingCycleLength { length }));
        }
    }
    Ok(PropertyCheck::holds_with(Verdict::Holds))
}

/// The three purely graph-shaped checks, with thresholds derived from the
/// vertex count.
#[derive(Debug, Clone, PartialEq)]
pub struct StructuralChecks {
    pub connected: PropertyCheck,
    pub cycle_separation: PropertyCheck,
    pub odd_cycles: PropertyCheck,
    pub short_cycle_cap: usize,
    pub required_separation: usize,
}

pub fn check_structure(graph: &Graph) -> Result<StructuralChecks> {
    let (cap, separation) = structure_thresholds(graph.vertex_count())?;
    Ok(StructuralChecks {
        connected: check_connectivity(graph),
        cycle_separation: check_cycle_separation(graph, cap, separation)?,
        odd_cycles: check_odd_cycles(graph)?,
        short_cycle_cap: cap,
        required_separation: separation,
    })
}

/// Leakage of `subset` inside the network with `excluded` removed, as
/// `(numerator, denominator)`: the conductance crossing from the subset to
/// the rest of the residual network, over the subset's total residual
/// strength. A zero denominator means the subset is stranded.
pub fn expansion_ratio(net: &Network, excluded: &[usize], subset: &[usize]) -> Result<(f64, f64)> {
    let n = net.vertex_count();
    let mut dropped = vec![false; n];
    for &v in excluded {
        net.graph().check_vertex(v)?;
        dropped[v] = true;
    }
    if subset.is_empty() {
        return Err(Error::Argument(String::from("expansion subset is empty")));
    }
    let mut in_subset = vec![false; n];
    for &v in subset {
        net.graph().check_vertex(v)?;
        if dropped[v] {
            return Err(Error::Argument(alloc::format!("subset vertex {v} is excluded")));
        }
        if in_subset[v] {
            return Err(Error::Argument(alloc::format!("subset vertex {v} appears twice")));
        }
        in_subset[v] = true;
    }
    let mut denominator = 0.0;
    let mut internal_doubled = 0.0;
    for &v in subset {
        for &(j, e) in net.incident(v) {
            if dropped[j] {
                continue;
            }
            denominator += net.conductances()[e];
            if in_subset[j] {
                internal_doubled += net.conductances()[e];
            }
        }
    }
    Ok((denominator - internal_doubled, denominator))
}

/// Lower bound every considered subset must meet: the network-wide minimum
/// conductance over six times the maximum. Always at most 1/6.
pub fn expansion_bound(net: &Network) -> Result<f64> {
    if net.conductances().is_empty() {
        return Err(Error::EmptyEdgeSet);
    }
    let min = net.conductances().iter().copied().fold(f64::INFINITY, f64::min);
    let max = net.conductances().iter().copied().fold(0.0f64, f64::max);
    Ok(min / (6.0 * max))
}

/// Checks that every examined subset of the residual network leaks at least
/// [`expansion_bound`] of its strength. Subsets up to `exhaustive_cap`
/// vertices are enumerated completely; `samples` further subsets are drawn
/// uniformly (size uniform up to half the residual network). Only subsets no
/// larger than half are considered: the complement of a large set leaks for
/// it.
pub fn check_expansion(
    net: &Network,
    excluded: &[usize],
    exhaustive_cap: usize,
    samples: usize,
    seed: u64,
) -> Result<PropertyCheck> {
    let n = net.vertex_count();
    let bound = expansion_bound(net)?;
    let mut dropped = vec![false; n];
    for &v in excluded {
        net.graph().check_vertex(v)?;
        dropped[v] = true;
    }
    let residual: Vec<usize> = (0..n).filter(|&v| !dropped[v]).collect();
    if residual.is_empty() {
        return Ok(PropertyCheck::holds_with(Verdict::Inapplicable));
    }
    let half = residual.len() / 2;

    // Residual strength per vertex; also covers the singleton subsets:
    // a singleton's ratio is exactly 1 unless it is stranded.
    let mut res_strength = vec![0.0; n];
    for &v in &residual {
        for &(j, e) in net.incident(v) {
            if !dropped[j] {
                res_strength[v] += net.conductances()[e];
            }
        }
    }
    if exhaustive_cap >= 1 && half >= 1 {
        for &v in &residual {
            if res_strength[v] == 0.0 {
                return Ok(PropertyCheck::fails(Witness::LowExpansion {
                    subset: vec![v],
                    ratio: 0.0,
                    bound,
                }));
            }
        }
    }
    // Pairs: a pair without an internal edge has ratio 1, so only edges
    // need scanning.
    if exhaustive_cap >= 2 && half >= 2 {
        for (idx, &(u, v)) in net.graph().edges().iter().enumerate() {
            if dropped[u] || dropped[v] {
                continue;
            }
            let denominator = res_strength[u] + res_strength[v];
            let numerator = denominator - 2.0 * net.conductances()[idx];
            if numerator / denominator < bound {
                return Ok(PropertyCheck::fails(Witness::LowExpansion {
                    subset: vec![u, v],
                    ratio: numerator / denominator,
                    bound,
                }));
            }
        }
    }
    // Larger exhaustive sizes: plain combination walk. Only useful on small
    // networks; the default cap stops at pairs.
    let mut in_subset = vec![false; n];
    for size in 3..=exhaustive_cap.min(half) {
        let mut pick: Vec<usize> = (0..size).collect();
        loop {
            let subset: Vec<usize> = pick.iter().map(|&i| residual[i]).collect();
            if let Some(check) = evaluate_subset(net, &dropped, &mut in_subset, &subset, bound) {
                return Ok(check);
            }
            if !next_combination(&mut pick, residual.len()) {
                break;
            }
        }
    }

    if half <= exhaustive_cap {
        return Ok(PropertyCheck::holds_with(Verdict::Holds));
    }
    let mut rng = rng_from(seed);
    let mut scratch = residual.clone();
    for _ in 0..samples {
        let size = rng.gen_range(1..=half);
        // partial Fisher-Yates: the first `size` entries become the draw
        for i in 0..size {
            let j = rng.gen_range(i..scratch.len());
            scratch.swap(i, j);
        }
        if let Some(check) = evaluate_subset(net, &dropped, &mut in_subset, &scratch[..size], bound)
        {
            return Ok(check);
        }
    }
    Ok(PropertyCheck::holds_with(Verdict::SampledHolds))
}

/// Advances `pick` to the next k-combination of `0..n` in lexicographic
/// order; false once the last one has been visited.
fn next_combination(pick: &mut [usize], n: usize) -> bool {
    let k = pick.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if pick[i] != i + n - k {
            pick[i] += 1;
            for j in i + 1..k {
                pick[j] = pick[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Ratio test for one subset; `in_subset` is scratch space, cleared on exit.
fn evaluate_subset(
    net: &Network,
    dropped: &[bool],
    in_subset: &mut [bool],
    subset: &[usize],
    bound: f64,
) -> Option<PropertyCheck> {
    for &v in subset {
        in_subset[v] = true;
    }
    let mut denominator = 0.0;
    let mut internal_doubled = 0.0;
    for &v in subset {
        for &(j, e) in net.incident(v) {
            if dropped[j] {
                continue;
            }
            denominator += net.conductances()[e];
            if in_subset[j] {
                internal_doubled += net.conductances()[e];
            }
        }
    }
    for &v in subset {
        in_subset[v] = false;
    }
    let violated = denominator == 0.0 || (denominator - internal_doubled) / denominator < bound;
    if violated {
        let ratio = if denominator == 0.0 {
            0.0
        } else {
            (denominator - internal_doubled) / denominator
        };
        let mut sorted = subset.to_vec();
        sorted.sort_unstable();
        Some(PropertyCheck::fails(Witness::LowExpansion { subset: sorted, ratio, bound }))
    } else {
        None
    }
}

/// Every degree must lie strictly inside `(delta * c * ln n, 4 * c * ln n)`,
/// where `coefficient` is the expected degree per unit of ln n (for edge
/// probability p on n vertices this is p * n / ln n).
pub fn check_degree_band(graph: &Graph, coefficient: f64, delta: f64) -> Result<PropertyCheck> {
    if !(coefficient.is_finite() && coefficient > 0.0) {
        return Err(Error::Argument(alloc::format!(
            "degree coefficient must be positive, got {coefficient}"
        )));
    }
    if !(delta.is_finite() && delta > 0.0 && delta < 1.0) {
        return Err(Error::Argument(alloc::format!(
            "degree slack must lie in (0, 1), got {delta}"
        )));
    }
    let ln_n = math::ln(graph.vertex_count() as f64);
    let low = delta * coefficient * ln_n;
    let high = 4.0 * coefficient * ln_n;
    for v in 0..graph.vertex_count() {
        let d = graph.degree(v)? as f64;
        if !(d > low && d < high) {
            return Ok(PropertyCheck::fails(Witness::DegreeOutOfBand {
                vertex: v,
                degree: d as usize,
                low,
                high,
            }));
        }
    }
    Ok(PropertyCheck::holds_with(Verdict::Holds))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::ConductanceScheme;
    use crate::testkit::{complete, path, ring};

    fn unit(g: Graph) -> Network {
        Network::assign(g, &ConductanceScheme::unit()).unwrap()
    }

    #[test]
    fn thresholds_at_reference_size() {
        assert_eq!(structure_thresholds(1000).unwrap(), (0, 4));
        assert_eq!(structure_thresholds(20).unwrap(), (0, 3));
        assert!(structure_thresholds(2).is_err());
    }

    #[test]
    fn connectivity_check() {
        assert_eq!(check_connectivity(&ring(6)).verdict, Verdict::Holds);
        let g = Graph::new(5, vec![(0, 1), (2, 3), (3, 4)]).unwrap();
        let check = check_connectivity(&g);
        assert_eq!(check.verdict, Verdict::Fails);
        assert_eq!(check.witness, Some(Witness::Disconnected { components: 2 }));
    }

    #[test]
    fn cycle_separation_with_explicit_thresholds() {
        // two triangles joined through a 3-hop path
        let g = Graph::new(
            8,
            vec![(0, 1), (0, 2), (1, 2), (3, 4), (3, 5), (4, 5), (2, 6), (6, 7), (7, 3)],
        )
        .unwrap();
        assert_eq!(check_cycle_separation(&g, 3, 3).unwrap().verdict, Verdict::Holds);
        let tight = check_cycle_separation(&g, 3, 4).unwrap();
        assert_eq!(tight.verdict, Verdict::Fails);
        match tight.witness.unwrap() {
            Witness::CloseCycles { first, second, distance } => {
                assert_eq!(first, vec![0, 1, 2]);
                assert_eq!(second, vec![3, 4, 5]);
                assert_eq!(distance, 3);
            }
            other => panic!("unexpected witness {other:?}"),
        }
        // sharing a vertex means distance zero
        let shared = Graph::new(5, vec![(0, 1), (0, 2), (1, 2), (0, 3), (0, 4), (3, 4)]).unwrap();
        let check = check_cycle_separation(&shared, 3, 1).unwrap();
        assert_eq!(check.verdict, Verdict::Fails);
        // a cap below any cycle length is vacuous
        assert_eq!(check_cycle_separation(&shared, 2, 10).unwrap().verdict, Verdict::Holds);
        // cycles in different components never conflict
        let split = Graph::new(6, vec![(0, 1), (0, 2), (1, 2), (3, 4), (3, 5), (4, 5)]).unwrap();
        assert_eq!(check_cycle_separation(&split, 3, 100).unwrap().verdict, Verdict::Holds);
    }

    #[test]
    fn odd_cycle_presence() {
        assert_eq!(check_odd_cycles(&complete(8)).unwrap().verdict, Verdict::Holds);
        let even = check_odd_cycles(&ring(8)).unwrap();
        assert_eq!(even.witness, Some(Witness::MissingCycleLength { length: 3 }));
        // a triangle and a pentagon, but nothing of length 7
        let g = Graph::new(
            8,
            vec![(0, 1), (0, 2), (1, 2), (3, 4), (4, 5), (5, 6), (6, 7), (3, 7)],
        )
        .unwrap();
        let check = check_odd_cycles(&g).unwrap();
        assert_eq!(check.witness, Some(Witness::MissingCycleLength { length: 7 }));
    }

    #[test]
    fn structure_bundle_on_reference_circle() {
        let checks = check_structure(&ring(1000)).unwrap();
        assert_eq!(checks.short_cycle_cap, 0);
        assert_eq!(checks.required_separation, 4);
        assert_eq!(checks.connected.verdict, Verdict::Holds);
        assert_eq!(checks.cycle_separation.verdict, Verdict::Holds);
        // an even circle has no odd cycles at all
        assert_eq!(checks.odd_cycles.verdict, Verdict::Fails);
    }

    #[test]
    fn arc_of_half_the_circle_leaks_two_edges() {
        let net = unit(ring(1000));
        let arc: Vec<usize> = (0..500).collect();
        let (num, den) = expansion_ratio(&net, &[], &arc).unwrap();
        assert_eq!(num, 2.0);
        assert_eq!(den, 1000.0);
        // the sampled check stays clean on the same network: random subsets
        // of a circle leak plenty, and the structured arc is never drawn
        let check = check_expansion(&net, &[], 2, 50, 7).unwrap();
        assert_eq!(check.verdict, Verdict::SampledHolds);
    }

    #[test]
    fn singleton_ratios() {
        let net = unit(path(3));
        assert_eq!(expansion_ratio(&net, &[], &[0]).unwrap(), (1.0, 1.0));
        assert_eq!(expansion_ratio(&net, &[], &[1]).unwrap(), (2.0, 2.0));
        // excluding the middle strands both ends
        let check = check_expansion(&net, &[1], 2, 10, 0).unwrap();
        assert_eq!(check.verdict, Verdict::Fails);
        match check.witness.unwrap() {
            Witness::LowExpansion { subset, ratio, .. } => {
                assert_eq!(subset, vec![0]);
                assert_eq!(ratio, 0.0);
            }
            other => panic!("unexpected witness {other:?}"),
        }
    }

    #[test]
    fn detached_pair_is_found_exhaustively() {
        let mut edges = complete(4).edges().to_vec();
        edges.push((4, 5));
        let net = Network::from_parts(Graph::new(6, edges).unwrap(), vec![1.0; 7]).unwrap();
        let check = check_expansion(&net, &[], 2, 0, 0).unwrap();
        assert_eq!(check.verdict, Verdict::Fails);
        let witness = check.witness.unwrap();
        match &witness {
            Witness::LowExpansion { subset, ratio, bound } => {
                assert_eq!(subset, &vec![4, 5]);
                assert_eq!(*ratio, 0.0);
                assert_eq!(*bound, 1.0 / 6.0);
                // the witness re-evaluates to the same verdict
                let (num, den) = expansion_ratio(&net, &[], subset).unwrap();
                assert_eq!(num, 0.0);
                assert_eq!(den, 2.0);
            }
            other => panic!("unexpected witness {other:?}"),
        }
    }

    #[test]
    fn small_network_is_proven_not_sampled() {
        // half of 4 vertices is 2, within the exhaustive cap, so the verdict
        // upgrades to a proof
        let net = unit(complete(4));
        let check = check_expansion(&net, &[], 2, 100, 1).unwrap();
        assert_eq!(check.verdict, Verdict::Holds);
        // everything excluded: nothing to measure
        let check = check_expansion(&net, &[0, 1, 2, 3], 2, 10, 1).unwrap();
        assert_eq!(check.verdict, Verdict::Inapplicable);
    }

    #[test]
    fn exhaustive_triples_catch_a_clique() {
        // a heavy triangle {0,1,2} hanging off a light star around 3
        let g = Graph::new(
            6,
            vec![(0, 1), (0, 2), (1, 2), (0, 3), (3, 4), (3, 5), (4, 5)],
        )
        .unwrap();
        // conductances follow the canonical sorted edge order:
        // (0,1) (0,2) (0,3) (1,2) (3,4) (3,5) (4,5)
        let net =
            Network::from_parts(g, vec![100.0, 100.0, 1.0, 100.0, 1.0, 1.0, 1.0]).unwrap();
        // bound = 1/600; the triangle leaks 1/601 of its strength
        let check = check_expansion(&net, &[], 3, 0, 0).unwrap();
        assert_eq!(check.verdict, Verdict::Fails);
        match check.witness.unwrap() {
            Witness::LowExpansion { subset, ratio, bound } => {
                assert_eq!(subset, vec![0, 1, 2]);
                assert!((ratio - 1.0 / 601.0).abs() < 1e-15);
                assert!((bound - 1.0 / 600.0).abs() < 1e-18);
            }
            other => panic!("unexpected witness {other:?}"),
        }
        // pairs alone miss it, and with no samples the verdict stays weak
        let pairs_only = check_expansion(&net, &[], 2, 0, 0).unwrap();
        assert_eq!(pairs_only.verdict, Verdict::SampledHolds);
    }

    #[test]
    fn sampled_check_is_deterministic() {
        use crate::generate::{generate, GenSpec};
        let net = unit(generate(&GenSpec::gnp(60, 0.3, 2)).unwrap());
        let a = check_expansion(&net, &[], 2, 150, 11).unwrap();
        let b = check_expansion(&net, &[], 2, 150, 11).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.verdict, Verdict::SampledHolds);
    }

    #[test]
    fn degree_band_on_circle() {
        let g = ring(1000);
        // coefficient matching edge probability 0.01 on 1000 vertices
        let c = 0.01 * 1000.0 / math::ln(1000.0);
        assert_eq!(check_degree_band(&g, c, 0.1).unwrap().verdict, Verdict::Holds);
        let tight = check_degree_band(&g, c, 0.5).unwrap();
        assert_eq!(tight.verdict, Verdict::Fails);
        match tight.witness.unwrap() {
            Witness::DegreeOutOfBand { vertex, degree, low, high } => {
                assert_eq!(vertex, 0);
                assert_eq!(degree, 2);
                assert!(low > 2.0 && high > low);
            }
            other => panic!("unexpected witness {other:?}"),
        }
        assert!(check_degree_band(&g, -1.0, 0.1).is_err());
        assert!(check_degree_band(&g, 1.0, 1.0).is_err());
    }
}

//! Concentration of the potential field around its predicted constant.
//!
//! On well-connected networks the solved field is nearly flat: almost every
//! interior vertex sits close to the strength-weighted mean of the pinned
//! values. [`predicted_constant`] computes that mean, [`concentration_stats`]
//! measures how far a field actually strays from it, and [`consensus_run`]
//! reaches the same field by synchronous local averaging from an arbitrary
//! starting state, demonstrating that the flat profile is an attractor and
//! not an artifact of the solver.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;
use crate::network::Network;
use crate::solver::{check_field_shape, BoundaryCondition, Dirichlet, PotentialField, StopRule};

pub const DEFAULT_BINS: usize = 50;

/// Strength-weighted mean of the pinned potentials: the constant the
/// interior concentrates around. Invariant under rescaling every
/// conductance by the same factor.
pub fn predicted_constant(net: &Network, bc: &BoundaryCondition) -> Result<f64> {
    let mut num = 0.0;
    let mut den = 0.0;
    for (v, p) in bc.pins() {
        num += p * net.strength(v)?;
        den += net.strength(v)?;
    }
    Ok(num / den)
}

/// Deviation summary of a field over its defined interior (pinned vertices
/// are not counted). Deviations are taken against `v_bar_c`, the predicted
/// constant. `histogram` bins the interior potentials over [0, 1]; a value
/// of exactly 1 lands in the last bin.
#[derive(Debug, Clone, PartialEq)]
pub struct ConcentrationStats {
    pub v_bar_c: f64,
    pub max_dev: f64,
    pub mean_dev: f64,
    /// Population standard deviation of the signed deviations.
    pub std_dev: f64,
    pub histogram: Vec<usize>,
    pub interior_count: usize,
    pub interior_mean: f64,
}

pub fn concentration_stats(
    net: &Network,
    bc: &BoundaryCondition,
    field: &PotentialField,
    bins: usize,
) -> Result<ConcentrationStats> {
    if bins == 0 {
        return Err(Error::Argument(alloc::string::String::from(
            "histogram needs at least one bin",
        )));
    }
    check_field_shape(net, field)?;
    let d = Dirichlet::prepare(net, bc)?;
    let v_bar_c = d.weighted_boundary_mean();
    let mut histogram = vec![0usize; bins];
    let mut count = 0usize;
    let mut sum = 0.0;
    let mut abs_sum = 0.0;
    let mut signed_sum = 0.0;
    let mut signed_sq = 0.0;
    let mut max_dev = 0.0f64;
    for v in 0..net.vertex_count() {
        if d.is_boundary[v] || !field.defined[v] {
            continue;
        }
        let value = field.values[v];
        if !value.is_finite() {
            return Err(Error::Numeric(format!("non-finite potential at vertex {v}")));
        }
        let dev = value - v_bar_c;
        count += 1;
        sum += value;
        abs_sum += math::abs(dev);
        signed_sum += dev;
        signed_sq += dev * dev;
        max_dev = max_dev.max(math::abs(dev));
        let bin = ((value * bins as f64) as usize).min(bins - 1);
        histogram[bin] += 1;
    }
    if count == 0 {
        return Err(Error::EmptyInterior);
    }
    let n = count as f64;
    let mean_signed = signed_sum / n;
    let variance = (signed_sq / n - mean_signed * mean_signed).max(0.0);
    Ok(ConcentrationStats {
        v_bar_c,
        max_dev,
        mean_dev: abs_sum / n,
        std_dev: math::sqrt(variance),
        histogram,
        interior_count: count,
        interior_mean: sum / n,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConsensusOutcome {
    pub field: PotentialField,
    pub steps: usize,
    /// Largest single-vertex update of the final step.
    pub final_delta: f64,
}

/// Synchronous averaging: every interior vertex simultaneously replaces its
/// value with the conductance-weighted mean of its neighbors, pinned
/// vertices held fixed. From any finite starting state this converges to
/// the solved field. States are clamped to the hull of the pins and the
/// initial values, which contains the fixed point and so never interferes
/// with the limit.
pub fn consensus_run(
    net: &Network,
    bc: &BoundaryCondition,
    initial: Option<&[f64]>,
    tol: f64,
    max_steps: usize,
) -> Result<ConsensusOutcome> {
    if !(tol.is_finite() && tol > 0.0) {
        return Err(Error::Argument(format!("tolerance must be positive, got {tol}")));
    }
    let d = Dirichlet::prepare(net, bc)?;
    let n = net.vertex_count();
    let mut lo = bc.min_potential();
    let mut hi = bc.max_potential();
    let mut values = match initial {
        Some(start) => {
            if start.len() != n {
                return Err(Error::Argument(format!(
                    "initial state has {} entries for {} vertices",
                    start.len(),
                    n
                )));
            }
            for (v, &x) in start.iter().enumerate() {
                if d.defined[v] && !x.is_finite() {
                    return Err(Error::Argument(format!(
                        "initial state is not finite at vertex {v}"
                    )));
                }
                if d.defined[v] {
                    lo = lo.min(x);
                    hi = hi.max(x);
                }
            }
            start.to_vec()
        }
        None => vec![d.weighted_boundary_mean(); n],
    };
    for (v, p) in bc.pins() {
        values[v] = p;
    }
    if d.interior.is_empty() {
        return Ok(ConsensusOutcome { field: d.finish(values, 0.0, 0), steps: 0, final_delta: 0.0 });
    }

    let conductance = net.conductances();
    let strengths = net.strengths_raw();
    let mut next = values.clone();
    let mut stop = StopRule::new(tol);
    let mut delta = f64::INFINITY;
    for step in 1..=max_steps {
        delta = 0.0;
        for &i in &d.interior {
            let mut num = 0.0;
            for &(j, e) in net.incident(i) {
                num += conductance[e] * values[j];
            }
            let updated = (num / strengths[i]).clamp(lo, hi);
            let change = math::abs(updated - values[i]);
            if change > delta {
                delta = change;
            }
            next[i] = updated;
        }
        for &i in &d.interior {
            values[i] = next[i];
        }
        if stop.observe(delta) {
            let defect = d.max_defect(&values);
            if defect <= tol {
                return Ok(ConsensusOutcome {
                    field: d.finish(values, defect, step),
                    steps: step,
                    final_delta: delta,
                });
            }
        }
    }
    Err(Error::NoConvergence { iterations: max_steps, residual: delta })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::{generate, GenSpec};
    use crate::network::ConductanceScheme;
    use crate::solver::{solve, solve_dense, DEFAULT_MAX_ITER};
    use crate::testkit::{path, ring};
    use approx::assert_relative_eq;

    fn unit(g: crate::graph::Graph) -> Network {
        Network::assign(g, &ConductanceScheme::unit()).unwrap()
    }

    fn bc(pins: &[(usize, f64)]) -> BoundaryCondition {
        BoundaryCondition::new(pins.to_vec()).unwrap()
    }

    #[test]
    fn predicted_constant_weights_by_strength() {
        // strengths 2 and 1 at the pinned ends of a 2/1 path
        let net = Network::from_parts(path(3), vec![2.0, 1.0]).unwrap();
        assert_eq!(predicted_constant(&net, &bc(&[(0, 0.75), (2, 0.0)])).unwrap(), 0.5);
        assert_eq!(predicted_constant(&net, &bc(&[(0, 1.0), (2, 0.25)])).unwrap(), 0.75);
        assert_relative_eq!(
            predicted_constant(&net, &bc(&[(0, 0.9), (2, 0.0)])).unwrap(),
            0.6,
            epsilon = 1e-15
        );
    }

    #[test]
    fn predicted_constant_ignores_global_scale() {
        let base = Network::from_parts(path(4), vec![0.5, 2.0, 1.25]).unwrap();
        let pins = bc(&[(0, 0.8), (3, 0.1)]);
        let reference = predicted_constant(&base, &pins).unwrap();
        for scale in [0.5, 3.0] {
            let scaled = Network::from_parts(
                path(4),
                vec![0.5 * scale, 2.0 * scale, 1.25 * scale],
            )
            .unwrap();
            assert_relative_eq!(
                predicted_constant(&scaled, &pins).unwrap(),
                reference,
                epsilon = 1e-15
            );
        }
    }

    #[test]
    fn stats_on_a_constant_field() {
        let net = unit(ring(10));
        let pins = bc(&[(0, 0.3), (5, 0.3)]);
        let field = solve(&net, &pins, 1e-12, 1000).unwrap();
        let stats = concentration_stats(&net, &pins, &field, 10).unwrap();
        assert_eq!(stats.v_bar_c, 0.3);
        assert_eq!(stats.max_dev, 0.0);
        assert_eq!(stats.mean_dev, 0.0);
        assert_eq!(stats.std_dev, 0.0);
        assert_eq!(stats.interior_count, 8);
        assert_relative_eq!(stats.interior_mean, 0.3, epsilon = 1e-15);
        // all eight interior values in the bin holding 0.3
        assert_eq!(stats.histogram[3], 8);
        assert_eq!(stats.histogram.iter().sum::<usize>(), 8);
    }

    #[test]
    fn histogram_edges_and_exact_one() {
        let net = unit(path(4));
        let pins = bc(&[(0, 1.0), (3, 0.0)]);
        let field = PotentialField {
            values: vec![1.0, 1.0, 0.0, 0.0],
            defined: vec![true; 4],
            residual_norm: 0.0,
            iterations: 0,
        };
        let stats = concentration_stats(&net, &pins, &field, 4).unwrap();
        // interior vertices 1 and 2 hold 1.0 and 0.0
        assert_eq!(stats.histogram, vec![1, 0, 0, 1]);
        assert_eq!(stats.interior_count, 2);
        assert_relative_eq!(stats.v_bar_c, 0.5, epsilon = 1e-15);
        assert_relative_eq!(stats.max_dev, 0.5, epsilon = 1e-15);
    }

    #[test]
    fn empty_interior_is_an_error() {
        let g = crate::graph::Graph::new(2, vec![(0, 1)]).unwrap();
        let net = unit(g);
        let pins = bc(&[(0, 1.0), (1, 0.0)]);
        let field = solve(&net, &pins, 1e-10, 10).unwrap();
        let err = concentration_stats(&net, &pins, &field, 10).unwrap_err();
        assert!(matches!(err, Error::EmptyInterior));

        // interior exists but none of it is reachable from the pins
        let g = crate::graph::Graph::new(4, vec![(0, 1), (2, 3)]).unwrap();
        let net = unit(g);
        let pins = bc(&[(0, 1.0), (1, 0.0)]);
        let field = solve(&net, &pins, 1e-10, 10).unwrap();
        let err = concentration_stats(&net, &pins, &field, 10).unwrap_err();
        assert!(matches!(err, Error::EmptyInterior));
    }

    #[test]
    fn consensus_near_the_fixed_point_stops_quickly() {
        let net = unit(ring(16));
        let pins = bc(&[(0, 1.0), (8, 0.0)]);
        let solved = solve(&net, &pins, 1e-12, DEFAULT_MAX_ITER).unwrap();
        // the stop rule needs a few steps to certify its error estimate
        let outcome = consensus_run(&net, &pins, Some(&solved.values), 1e-9, 10).unwrap();
        assert!(outcome.steps <= 5, "took {} steps", outcome.steps);
        assert!(outcome.final_delta <= 1e-9);

        // an exact fixed point (constant field, equal pins) stops at once
        let equal = bc(&[(0, 0.5), (8, 0.5)]);
        let constant = vec![0.5; 16];
        let outcome = consensus_run(&net, &equal, Some(&constant), 1e-9, 10).unwrap();
        assert_eq!(outcome.steps, 1);
        assert_eq!(outcome.final_delta, 0.0);
    }

    #[test]
    fn consensus_on_a_path_reaches_the_midpoint() {
        let net = unit(path(3));
        let pins = bc(&[(0, 1.0), (2, 0.0)]);
        let outcome = consensus_run(&net, &pins, None, 1e-12, 1000).unwrap();
        assert_relative_eq!(outcome.field.values[1], 0.5, epsilon = 1e-12);
    }

    #[test]
    fn consensus_from_far_outside_the_hull() {
        let net = unit(ring(12));
        let pins = bc(&[(0, 0.9), (6, 0.1)]);
        let start = vec![5.0; 12];
        let outcome = consensus_run(&net, &pins, Some(&start), 1e-10, 100_000).unwrap();
        for v in 0..12 {
            let x = outcome.field.values[v];
            assert!((0.1..=0.9).contains(&x), "vertex {v} at {x}");
        }
    }

    #[test]
    fn consensus_agrees_with_the_solver() {
        for seed in [2u64, 14] {
            let g = generate(&GenSpec::gnp(40, 0.2, seed)).unwrap();
            assert!(g.is_connected());
            let net = Network::assign(g, &ConductanceScheme::uniform01(seed + 1)).unwrap();
            let pins = bc(&[(0, 1.0), (13, 0.4), (26, 0.0)]);
            // a deliberately lopsided start
            let start: Vec<f64> = (0..40).map(|v| (v % 7) as f64 / 7.0).collect();
            let outcome =
                consensus_run(&net, &pins, Some(&start), 1e-10, DEFAULT_MAX_ITER).unwrap();
            let exact = solve_dense(&net, &pins).unwrap();
            for v in 0..40 {
                assert!(
                    (outcome.field.values[v] - exact.values[v]).abs() <= 1e-8,
                    "seed {seed} vertex {v}"
                );
            }
        }
    }

    #[test]
    fn consensus_leaves_unreachable_vertices_undefined() {
        let g = crate::graph::Graph::new(5, vec![(0, 1), (1, 2), (3, 4)]).unwrap();
        let net = unit(g);
        let pins = bc(&[(0, 1.0), (2, 0.0)]);
        let outcome = consensus_run(&net, &pins, None, 1e-10, 1000).unwrap();
        assert!(outcome.field.values[3].is_nan());
        assert!(!outcome.field.defined[4]);
    }

    #[test]
    fn consensus_step_limit_errors() {
        let net = unit(ring(64));
        let err = consensus_run(&net, &bc(&[(0, 1.0), (32, 0.0)]), None, 1e-12, 2).unwrap_err();
        assert!(matches!(err, Error::NoConvergence { iterations: 2, .. }));
    }
}

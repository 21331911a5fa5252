//! Interior potentials under pinned boundary values.
//!
//! A boundary condition pins each boundary vertex x_k at a potential p_k in
//! [0, 1]. On every vertex connected to the boundary, the solved field is the
//! conductance-weighted harmonic extension: V_i equals the strength-weighted
//! mean of its neighbors' values. Vertices in components with no boundary
//! vertex are flagged undefined (value NaN).
//!
//! Two independent routes compute the field. [`solve`] runs in-place
//! Gauss-Seidel sweeps in ascending vertex order; [`solve_dense`] eliminates
//! the interior system directly with partial pivoting and exists to
//! cross-check the iterative route on small instances.
//!
//! Stopping: a sweep's max update alone is a poor proxy for error (the gap is
//! the inverse spectral gap, which grows with instance size), and downstream
//! audits (current balance, oracle agreement) need the *error* below `tol`.
//! Sweeps therefore continue until the max harmonic defect is within `tol`
//! and a geometric error estimate - last delta times rho/(1-rho) with rho
//! the observed sweep-to-sweep contraction - is within `tol/2`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;
use crate::network::Network;

pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_ITER: usize = 1_000_000;
/// Largest interior the dense elimination route accepts.
pub const DENSE_INTERIOR_CAP: usize = 2000;

/// Pinned potentials on a non-empty set of distinct vertices, each value in
/// [0, 1]. Entries are kept sorted by vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryCondition {
    vertices: Vec<usize>,
    potentials: Vec<f64>,
}

impl BoundaryCondition {
    pub fn new(pins: Vec<(usize, f64)>) -> Result<Self> {
        if pins.is_empty() {
            return Err(Error::Argument(alloc::string::String::from(
                "boundary needs at least one pinned vertex",
            )));
        }
        let mut pins = pins;
        pins.sort_unstable_by_key(|&(v, _)| v);
        if let Some(w) = pins.windows(2).find(|w| w[0].0 == w[1].0) {
            return Err(Error::Argument(format!(
                "vertex {} pinned more than once",
                w[0].0
            )));
        }
        for &(v, p) in &pins {
            if !(p.is_finite() && (0.0..=1.0).contains(&p)) {
                return Err(Error::Argument(format!(
                    "potential at vertex {v} must lie in [0, 1], got {p}"
                )));
            }
        }
        let (vertices, potentials) = pins.into_iter().unzip();
        Ok(BoundaryCondition { vertices, potentials })
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        false // construction requires at least one pin
    }

    pub fn vertices(&self) -> &[usize] {
        &self.vertices
    }

    pub fn potentials(&self) -> &[f64] {
        &self.potentials
    }

    pub fn pins(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.vertices.iter().copied().zip(self.potentials.iter().copied())
    }

    pub fn potential_of(&self, v: usize) -> Option<f64> {
        self.vertices.binary_search(&v).ok().map(|i| self.potentials[i])
    }

    pub fn min_potential(&self) -> f64 {
        self.potentials.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_potential(&self) -> f64 {
        self.potentials.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// A solved (or partially solved) potential assignment. `values[v]` is NaN
/// exactly where `defined[v]` is false: vertices unreachable from the
/// boundary. `residual_norm` is the max interior harmonic defect measured
/// after the final sweep; `iterations` counts full sweeps.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialField {
    pub values: Vec<f64>,
    pub defined: Vec<bool>,
    pub residual_norm: f64,
    pub iterations: usize,
}

/// Boundary structure shared by the solver, walk engine, and consensus:
/// which vertices are pinned, and which are reachable from a pin.
pub(crate) struct Dirichlet<'a> {
    pub net: &'a Network,
    pub bc: &'a BoundaryCondition,
    pub is_boundary: Vec<bool>,
    pub defined: Vec<bool>,
    /// Defined non-boundary vertices, ascending.
    pub interior: Vec<usize>,
}

impl<'a> Dirichlet<'a> {
    pub fn prepare(net: &'a Network, bc: &'a BoundaryCondition) -> Result<Self> {
        let n = net.vertex_count();
        let mut is_boundary = vec![false; n];
        for &v in bc.vertices() {
            net.graph().check_vertex(v)?;
            // A pinned vertex with no edge can source no current; reject it
            // as a modeling mistake rather than silently carrying it.
            net.strength(v)?;
            is_boundary[v] = true;
        }
        let mut defined = vec![false; n];
        let mut stack: Vec<usize> = bc.vertices().to_vec();
        for &v in bc.vertices() {
            defined[v] = true;
        }
        while let Some(v) = stack.pop() {
            for &(w, _) in net.incident(v) {
                if !defined[w] {
                    defined[w] = true;
                    stack.push(w);
                }
            }
        }
        let interior = (0..n).filter(|&v| defined[v] && !is_boundary[v]).collect();
        Ok(Dirichlet { net, bc, is_boundary, defined, interior })
    }

    /// Strength-weighted mean of the pinned potentials; the natural initial
    /// guess and the constant the interior concentrates around on expanders.
    pub fn weighted_boundary_mean(&self) -> f64 {
        let mut num = 0.0;
        let mut den = 0.0;
        for (v, p) in self.bc.pins() {
            let s = self.net.strengths_raw()[v];
            num += p * s;
            den += s;
        }
        num / den
    }

    /// Max harmonic defect over the interior of `values`.
    pub fn max_defect(&self, values: &[f64]) -> f64 {
        let mut worst = 0.0;
        for &i in &self.interior {
            let mut num = 0.0;
            for &(j, e) in self.net.incident(i) {
                num += self.net.conductances()[e] * values[j];
            }
            let defect = math::abs(values[i] - num / self.net.strengths_raw()[i]);
            if defect > worst {
                worst = defect;
            }
        }
        worst
    }

    pub fn finish(&self, mut values: Vec<f64>, residual_norm: f64, iterations: usize) -> PotentialField {
        for v in 0..values.len() {
            if !self.defined[v] {
                values[v] = f64::NAN;
            }
        }
        PotentialField {
            values,
            defined: self.defined.clone(),
            residual_norm,
            iterations,
        }
    }
}

/// Tracks sweep-to-sweep contraction and decides when iteration may stop.
/// Shared by the Gauss-Seidel solver and the consensus process.
pub(crate) struct StopRule {
    tol: f64,
    prev_delta: f64,
    ratios: [f64; 3],
    filled: usize,
    best_delta: f64,
    since_best: usize,
}

impl StopRule {
    /// Sweeps with no measurable update; the iteration is at its floating
    /// point fixed point and cannot improve further.
    const STALL_SWEEPS: usize = 200;

    pub fn new(tol: f64) -> Self {
        StopRule {
            tol,
            prev_delta: f64::INFINITY,
            ratios: [f64::INFINITY; 3],
            filled: 0,
            best_delta: f64::INFINITY,
            since_best: 0,
        }
    }

    /// Feed one sweep's max update; returns true when a (cheap) stopping
    /// candidate is reached and the caller should verify the defect.
    pub fn observe(&mut self, delta: f64) -> bool {
        if delta == 0.0 {
            return true;
        }
        if self.prev_delta.is_finite() && self.prev_delta > 0.0 {
            self.ratios[self.filled % 3] = delta / self.prev_delta;
            self.filled += 1;
        }
        self.prev_delta = delta;
        if delta < self.best_delta * 0.999_999 {
            self.best_delta = delta;
            self.since_best = 0;
        } else {
            self.since_best += 1;
        }
        if self.since_best >= Self::STALL_SWEEPS {
            // Progress has flattened at the arithmetic floor; accept if the
            // defect verifies, rather than spinning until max_iter.
            return delta <= self.tol;
        }
        if delta > self.tol || self.filled < 3 {
            return false;
        }
        let rho = self.ratios.iter().copied().fold(0.0, f64::max);
        if rho >= 1.0 {
            return false;
        }
        // Geometric tail bound on the remaining error.
        delta * rho / (1.0 - rho) <= 0.5 * self.tol
    }
}

/// Gauss-Seidel solve: in-place neighbor averaging over the defined interior
/// in ascending vertex order, pinned values held fixed. Updates are clamped
/// to the pinned hull, which the exact solution provably satisfies; this
/// keeps transient rounding from ever leaving it.
pub fn solve(
    net: &Network,
    bc: &BoundaryCondition,
    tol: f64,
    max_iter: usize,
) -> Result<PotentialField> {
    check_tol(tol)?;
    let d = Dirichlet::prepare(net, bc)?;
    let lo = bc.min_potential();
    let hi = bc.max_potential();
    let mut values = vec![d.weighted_boundary_mean(); net.vertex_count()];
    for (v, p) in bc.pins() {
        values[v] = p;
    }
    if d.interior.is_empty() {
        return Ok(d.finish(values, 0.0, 0));
    }

    let conductance = net.conductances();
    let strengths = net.strengths_raw();
    let mut stop = StopRule::new(tol);
    let mut last_defect = f64::INFINITY;
    for sweep in 1..=max_iter {
        let mut delta: f64 = 0.0;
        for &i in &d.interior {
            let mut num = 0.0;
            for &(j, e) in net.incident(i) {
                num += conductance[e] * values[j];
            }
            let next = (num / strengths[i]).clamp(lo, hi);
            let change = math::abs(next - values[i]);
            if change > delta {
                delta = change;
            }
            values[i] = next;
        }
        if stop.observe(delta) {
            last_defect = d.max_defect(&values);
            if last_defect <= tol {
                return Ok(d.finish(values, last_defect, sweep));
            }
        }
    }
    Err(Error::NoConvergence {
        iterations: max_iter,
        residual: if last_defect.is_finite() { last_defect } else { d.max_defect(&values) },
    })
}

/// Dense route: assembles the interior system (I - Q) v = R p and solves it
/// by Gaussian elimination with partial pivoting. Independent of the
/// iterative path; used as its oracle.
pub fn solve_dense(net: &Network, bc: &BoundaryCondition) -> Result<PotentialField> {
    let d = Dirichlet::prepare(net, bc)?;
    let s = d.interior.len();
    if s > DENSE_INTERIOR_CAP {
        return Err(Error::InteriorTooLarge { size: s, cap: DENSE_INTERIOR_CAP });
    }
    let mut values = vec![0.0; net.vertex_count()];
    for (v, p) in bc.pins() {
        values[v] = p;
    }
    if s == 0 {
        return Ok(d.finish(values, 0.0, 0));
    }

    let mut column = vec![usize::MAX; net.vertex_count()];
    for (idx, &v) in d.interior.iter().enumerate() {
        column[v] = idx;
    }
    let mut a = vec![0.0; s * s];
    let mut b = vec![0.0; s];
    for (row, &i) in d.interior.iter().enumerate() {
        a[row * s + row] = 1.0;
        let strength = net.strengths_raw()[i];
        for &(j, e) in net.incident(i) {
            let w = net.conductances()[e] / strength;
            if d.is_boundary[j] {
                b[row] += w * values[j];
            } else {
                a[row * s + column[j]] -= w;
            }
        }
    }

    for col in 0..s {
        let pivot_row = (col..s)
            .max_by(|&r1, &r2| {
                math::abs(a[r1 * s + col]).total_cmp(&math::abs(a[r2 * s + col]))
            })
            .unwrap();
        if a[pivot_row * s + col] == 0.0 {
            return Err(Error::Numeric(format!("singular interior system at column {col}")));
        }
        if pivot_row != col {
            for k in 0..s {
                a.swap(col * s + k, pivot_row * s + k);
            }
            b.swap(col, pivot_row);
        }
        let pivot = a[col * s + col];
        for row in col + 1..s {
            let factor = a[row * s + col] / pivot;
            if factor == 0.0 {
                continue;
            }
            a[row * s + col] = 0.0;
            for k in col + 1..s {
                a[row * s + k] -= factor * a[col * s + k];
            }
            b[row] -= factor * b[col];
        }
    }
    for row in (0..s).rev() {
        let mut acc = b[row];
        for k in row + 1..s {
            acc -= a[row * s + k] * b[k];
        }
        b[row] = acc / a[row * s + row];
    }

    let lo = bc.min_potential();
    let hi = bc.max_potential();
    for (idx, &v) in d.interior.iter().enumerate() {
        values[v] = b[idx].clamp(lo, hi);
    }
    let residual = d.max_defect(&values);
    Ok(d.finish(values, residual, 0))
}

/// Net current injected by the boundary: sum over boundary vertices x_k of
/// sum over incident edges (x_k, i) of (V_{x_k} - V_i) c_{x_k,i}. Kirchhoff
/// balance makes this vanish on the exact field; on a solved field its
/// magnitude is at most the solve error times the total boundary strength.
pub fn current_balance(net: &Network, bc: &BoundaryCondition, field: &PotentialField) -> Result<f64> {
    check_field_shape(net, field)?;
    let mut total = 0.0;
    for (v, p) in bc.pins() {
        net.graph().check_vertex(v)?;
        for &(j, e) in net.incident(v) {
            total += (p - field.values[j]) * net.conductances()[e];
        }
    }
    Ok(total)
}

/// Post-hoc audit of a solved field: max interior harmonic defect, plus
/// whether every defined value lies inside the pinned hull.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldAudit {
    pub max_defect: f64,
    pub hull_ok: bool,
    pub defined_count: usize,
}

pub fn audit_field(net: &Network, bc: &BoundaryCondition, field: &PotentialField) -> Result<FieldAudit> {
    check_field_shape(net, field)?;
    let d = Dirichlet::prepare(net, bc)?;
    let lo = bc.min_potential();
    let hi = bc.max_potential();
    let mut hull_ok = true;
    let mut defined_count = 0;
    for v in 0..net.vertex_count() {
        if field.defined[v] {
            defined_count += 1;
            let x = field.values[v];
            if !(x >= lo && x <= hi) {
                hull_ok = false;
            }
        }
    }
    Ok(FieldAudit { max_defect: d.max_defect(&field.values), hull_ok, defined_count })
}

fn check_tol(tol: f64) -> Result<()> {
    if tol.is_finite() && tol > 0.0 {
        Ok(())
    } else {
        Err(Error::Argument(format!("tolerance must be positive, got {tol}")))
    }
}

pub(crate) fn check_field_shape(net: &Network, field: &PotentialField) -> Result<()> {
    if field.values.len() != net.vertex_count() || field.defined.len() != net.vertex_count() {
        return Err(Error::Argument(format!(
            "field over {} vertices does not match network with {}",
            field.values.len(),
            net.vertex_count()
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{ConductanceScheme, Network};
    use crate::testkit::{complete, path, ring};
    use approx::assert_relative_eq;

    fn unit(g: crate::graph::Graph) -> Network {
        Network::assign(g, &ConductanceScheme::unit()).unwrap()
    }

    fn bc(pins: &[(usize, f64)]) -> BoundaryCondition {
        BoundaryCondition::new(pins.to_vec()).unwrap()
    }

    #[test]
    fn boundary_condition_validation() {
        assert!(BoundaryCondition::new(vec![]).is_err());
        assert!(BoundaryCondition::new(vec![(0, 0.5), (0, 0.5)]).is_err());
        assert!(BoundaryCondition::new(vec![(0, 1.2)]).is_err());
        assert!(BoundaryCondition::new(vec![(0, -0.1)]).is_err());
        let b = bc(&[(5, 0.7), (2, 0.3)]);
        assert_eq!(b.vertices(), &[2, 5]);
        assert_eq!(b.potential_of(5), Some(0.7));
        assert_eq!(b.potential_of(3), None);
    }

    #[test]
    fn two_conductance_path_splits_two_thirds() {
        // a - m - b with conductances 2 and 1, pins a=1, b=0:
        // V_m = (2*1 + 1*0) / 3
        let net = Network::from_parts(path(3), vec![2.0, 1.0]).unwrap();
        let b = bc(&[(0, 1.0), (2, 0.0)]);
        let field = solve(&net, &b, 1e-10, 1000).unwrap();
        assert_relative_eq!(field.values[1], 2.0 / 3.0, epsilon = 1e-10);
        let dense = solve_dense(&net, &b).unwrap();
        assert_relative_eq!(dense.values[1], 2.0 / 3.0, epsilon = 1e-14);
    }

    #[test]
    fn ring4_antipodal_pins_average() {
        let net = unit(ring(4));
        let field = solve(&net, &bc(&[(0, 1.0), (2, 0.0)]), 1e-10, 1000).unwrap();
        assert_relative_eq!(field.values[1], 0.5, epsilon = 1e-10);
        assert_relative_eq!(field.values[3], 0.5, epsilon = 1e-10);
    }

    #[test]
    fn single_pin_gives_constant_field() {
        let net = unit(ring(12));
        let field = solve(&net, &bc(&[(3, 0.4)]), 1e-10, 100).unwrap();
        for v in 0..12 {
            assert_eq!(field.values[v], 0.4);
        }
        assert_eq!(field.residual_norm, 0.0);
    }

    #[test]
    fn equal_pins_give_constant_field() {
        let net = unit(complete(8));
        let field = solve(&net, &bc(&[(0, 0.4), (5, 0.4)]), 1e-10, 100).unwrap();
        assert!(field.values.iter().all(|&v| v == 0.4));
    }

    #[test]
    fn star_leaves_follow_center() {
        // center 0 pinned 1.0, leaf 1 pinned 0.0: every other leaf sits at
        // the center's value.
        let g = crate::graph::Graph::new(6, vec![(0, 1), (0, 2), (0, 3), (0, 4), (0, 5)]).unwrap();
        let net = unit(g);
        let field = solve(&net, &bc(&[(0, 1.0), (1, 0.0)]), 1e-12, 1000).unwrap();
        for leaf in 2..6 {
            assert_relative_eq!(field.values[leaf], 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn disconnected_component_is_undefined() {
        let g = crate::graph::Graph::new(6, vec![(0, 1), (1, 2), (3, 4), (4, 5)]).unwrap();
        let net = unit(g);
        let field = solve(&net, &bc(&[(0, 1.0), (2, 0.0)]), 1e-10, 1000).unwrap();
        assert!(field.defined[1]);
        for v in 3..6 {
            assert!(!field.defined[v]);
            assert!(field.values[v].is_nan());
        }
        let dense = solve_dense(&net, &bc(&[(0, 1.0), (2, 0.0)])).unwrap();
        assert_eq!(dense.defined, field.defined);
    }

    #[test]
    fn isolated_boundary_vertex_rejected() {
        let g = crate::graph::Graph::new(4, vec![(0, 1), (1, 2)]).unwrap();
        let net = unit(g);
        let err = solve(&net, &bc(&[(0, 1.0), (3, 0.0)]), 1e-10, 1000).unwrap_err();
        assert!(matches!(err, Error::IsolatedVertex { vertex: 3 }));
    }

    #[test]
    fn sweep_limit_reports_no_convergence() {
        let net = unit(ring(64));
        let err = solve(&net, &bc(&[(0, 1.0), (32, 0.0)]), 1e-12, 3).unwrap_err();
        match err {
            Error::NoConvergence { iterations, residual } => {
                assert_eq!(iterations, 3);
                assert!(residual.is_finite());
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn iterative_matches_dense_on_small_battery() {
        use crate::generate::{generate, GenSpec};
        for seed in 0..10u64 {
            let g = generate(&GenSpec::gnp(40, 0.2, seed)).unwrap();
            if !g.is_connected() {
                continue;
            }
            let net = Network::assign(g, &ConductanceScheme::uniform01(seed)).unwrap();
            let b = bc(&[(0, 1.0), (10, 0.3), (20, 0.7), (30, 0.0)]);
            let fast = solve(&net, &b, 1e-10, DEFAULT_MAX_ITER).unwrap();
            let exact = solve_dense(&net, &b).unwrap();
            for v in 0..40 {
                assert!(
                    (fast.values[v] - exact.values[v]).abs() <= 1e-8,
                    "seed {seed} vertex {v}: {} vs {}",
                    fast.values[v],
                    exact.values[v]
                );
            }
        }
    }

    #[test]
    fn superposition_of_boundary_data() {
        use crate::generate::{generate, GenSpec};
        let g = generate(&GenSpec::gnp(30, 0.25, 3)).unwrap();
        let net = Network::assign(g, &ConductanceScheme::power_law(4)).unwrap();
        let pins_p = [(0, 0.9), (7, 0.2), (15, 0.6)];
        let pins_q = [(0, 0.1), (7, 0.8), (15, 0.4)];
        let (a, b_coef) = (0.6, 0.4);
        let combo: Vec<(usize, f64)> = pins_p
            .iter()
            .zip(&pins_q)
            .map(|(&(v, p), &(_, q))| (v, a * p + b_coef * q))
            .collect();
        let fp = solve(&net, &bc(&pins_p), 1e-12, DEFAULT_MAX_ITER).unwrap();
        let fq = solve(&net, &bc(&pins_q), 1e-12, DEFAULT_MAX_ITER).unwrap();
        let fc = solve(&net, &BoundaryCondition::new(combo).unwrap(), 1e-12, DEFAULT_MAX_ITER).unwrap();
        for v in 0..30 {
            if fc.defined[v] {
                assert!(
                    (fc.values[v] - (a * fp.values[v] + b_coef * fq.values[v])).abs() <= 2e-12,
                    "vertex {v}"
                );
            }
        }
    }

    #[test]
    fn hull_and_defect_audit() {
        use crate::generate::{generate, GenSpec};
        let g = generate(&GenSpec::small_world(200, 0.02, 9)).unwrap();
        let net = Network::assign(g, &ConductanceScheme::uniform01(10)).unwrap();
        let b = bc(&[(0, 1.0), (50, 0.3), (100, 0.7), (150, 1.0)]);
        let field = solve(&net, &b, 1e-10, DEFAULT_MAX_ITER).unwrap();
        let audit = audit_field(&net, &b, &field).unwrap();
        assert!(audit.hull_ok);
        assert!(audit.max_defect <= 1e-10);
        assert_eq!(audit.defined_count, 200);
        assert!(field.residual_norm <= 1e-10);
    }

    #[test]
    fn current_balance_vanishes() {
        let net = Network::from_parts(path(3), vec![2.0, 1.0]).unwrap();
        let b = bc(&[(0, 1.0), (2, 0.0)]);
        let field = solve(&net, &b, 1e-10, 1000).unwrap();
        let balance = current_balance(&net, &b, &field).unwrap();
        assert!(balance.abs() <= 1e-10 * 3.0, "balance {balance}");

        // constant field: exact zero
        let netc = unit(ring(10));
        let bcc = bc(&[(0, 0.4), (5, 0.4)]);
        let fc = solve(&netc, &bcc, 1e-10, 100).unwrap();
        assert_eq!(current_balance(&netc, &bcc, &fc).unwrap(), 0.0);
    }

    #[test]
    fn dense_cap_enforced() {
        let net = unit(ring(2003));
        let err = solve_dense(&net, &bc(&[(0, 1.0), (1000, 0.0)])).unwrap_err();
        assert!(matches!(err, Error::InteriorTooLarge { size: 2001, cap: DENSE_INTERIOR_CAP }));
    }
}

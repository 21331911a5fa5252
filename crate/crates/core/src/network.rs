//! Graphs with positive edge conductances.
//!
//! Conductances are drawn in the graph's canonical edge order, one draw per
//! edge, so a (graph, scheme) pair pins every weight. Vertex strengths (the
//! incident-conductance sums) are cached at construction in neighbor-sorted
//! order; the solver and walk sampler sum in that same order, which keeps
//! weighted averages of equal values exactly equal to that value.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::math;
use crate::rng::rng_from;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum SchemeKind {
    /// Every edge gets conductance 1.
    Unit,
    /// I.i.d. uniform on (epsilon, 1); the floor keeps exact zeros out.
    Uniform01,
    /// I.i.d. heavy-tailed with density proportional to c^-gamma on [1, inf),
    /// sampled by inverse CDF.
    PowerLaw,
}

pub const DEFAULT_GAMMA: f64 = 2.5;
pub const DEFAULT_EPSILON: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct ConductanceScheme {
    pub kind: SchemeKind,
    pub seed: u64,
    /// Tail exponent for `PowerLaw`; must exceed 1.
    pub gamma: f64,
    /// Lower cutoff for `Uniform01`; zero is allowed but risks numerically
    /// negligible edges.
    pub epsilon: f64,
}

impl ConductanceScheme {
    pub fn unit() -> Self {
        ConductanceScheme { kind: SchemeKind::Unit, seed: 0, gamma: DEFAULT_GAMMA, epsilon: DEFAULT_EPSILON }
    }

    pub fn uniform01(seed: u64) -> Self {
        ConductanceScheme { kind: SchemeKind::Uniform01, seed, gamma: DEFAULT_GAMMA, epsilon: DEFAULT_EPSILON }
    }

    pub fn power_law(seed: u64) -> Self {
        ConductanceScheme { kind: SchemeKind::PowerLaw, seed, gamma: DEFAULT_GAMMA, epsilon: DEFAULT_EPSILON }
    }

    fn validate(&self) -> Result<()> {
        if self.kind == SchemeKind::PowerLaw && !(self.gamma > 1.0) {
            return Err(Error::Argument(format!(
                "power-law exponent must exceed 1, got {}",
                self.gamma
            )));
        }
        if self.kind == SchemeKind::Uniform01 && !(0.0..1.0).contains(&self.epsilon) {
            return Err(Error::Argument(format!(
                "uniform floor must lie in [0, 1), got {}",
                self.epsilon
            )));
        }
        Ok(())
    }
}

/// Quantile function of the power-law conductance distribution:
/// `u` in [0, 1) maps to `(1 - u)^(-1/(gamma - 1))`, support [1, inf),
/// complementary CDF `x^-(gamma-1)`.
pub fn power_law_inverse_cdf(u: f64, gamma: f64) -> f64 {
    math::powf(1.0 - u, -1.0 / (gamma - 1.0))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    graph: Graph,
    conductance: Vec<f64>,
    /// Per vertex: (neighbor, index into `conductance`), sorted by neighbor.
    incidence: Vec<Vec<(usize, usize)>>,
    strength: Vec<f64>,
}

impl Network {
    /// Draws one conductance per edge in canonical edge order.
    pub fn assign(graph: Graph, scheme: &ConductanceScheme) -> Result<Self> {
        scheme.validate()?;
        if graph.edge_count() == 0 {
            return Err(Error::EmptyEdgeSet);
        }
        let mut rng = rng_from(scheme.seed);
        let conductance = graph
            .edges()
            .iter()
            .map(|_| match scheme.kind {
                SchemeKind::Unit => 1.0,
                SchemeKind::Uniform01 => {
                    let u: f64 = rng.gen();
                    scheme.epsilon + (1.0 - scheme.epsilon) * u
                }
                SchemeKind::PowerLaw => power_law_inverse_cdf(rng.gen(), scheme.gamma),
            })
            .collect();
        Self::from_parts(graph, conductance)
    }

    /// Wraps an explicit conductance vector (parallel to the canonical edge
    /// list); every value must be finite and positive.
    pub fn from_parts(graph: Graph, conductance: Vec<f64>) -> Result<Self> {
        if conductance.len() != graph.edge_count() {
            return Err(Error::Argument(format!(
                "{} conductances for {} edges",
                conductance.len(),
                graph.edge_count()
            )));
        }
        if let Some(c) = conductance.iter().find(|c| !(c.is_finite() && **c > 0.0)) {
            return Err(Error::Argument(format!(
                "conductances must be finite and positive, got {c}"
            )));
        }
        let n = graph.vertex_count();
        let mut incidence = vec![Vec::new(); n];
        for (idx, &(u, v)) in graph.edges().iter().enumerate() {
            incidence[u].push((v, idx));
            incidence[v].push((u, idx));
        }
        let mut strength = vec![0.0; n];
        for (v, list) in incidence.iter_mut().enumerate() {
            list.sort_unstable();
            strength[v] = list.iter().map(|&(_, e)| conductance[e]).sum();
        }
        Ok(Network { graph, conductance, incidence, strength })
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn vertex_count(&self) -> usize {
        self.graph.vertex_count()
    }

    /// Conductances in canonical edge order.
    pub fn conductances(&self) -> &[f64] {
        &self.conductance
    }

    /// `(neighbor, edge index)` pairs for `v`, sorted by neighbor.
    pub fn incident(&self, v: usize) -> &[(usize, usize)] {
        &self.incidence[v]
    }

    pub fn conductance_between(&self, u: usize, v: usize) -> Option<f64> {
        if u >= self.vertex_count() || v >= self.vertex_count() {
            return None;
        }
        self.incidence[u]
            .binary_search_by_key(&v, |&(w, _)| w)
            .ok()
            .map(|slot| self.conductance[self.incidence[u][slot].1])
    }

    /// Sum of conductances incident to `v`; isolated vertices have no
    /// strength and report an error.
    pub fn strength(&self, v: usize) -> Result<f64> {
        self.graph.check_vertex(v)?;
        if self.incidence[v].is_empty() {
            return Err(Error::IsolatedVertex { vertex: v });
        }
        Ok(self.strength[v])
    }

    /// Cached strengths, 0.0 at isolated vertices.
    pub(crate) fn strengths_raw(&self) -> &[f64] {
        &self.strength
    }

    /// The network on the vertices outside `excluded`, conductances
    /// inherited, plus the map from new ids back to original ids.
    pub fn without_vertices(&self, excluded: &[usize]) -> Result<(Network, Vec<usize>)> {
        let (graph, to_parent) = self.graph.without_vertices(excluded)?;
        let mut drop = vec![false; self.vertex_count()];
        for &v in excluded {
            drop[v] = true;
        }
        let conductance = self
            .graph
            .edges()
            .iter()
            .zip(&self.conductance)
            .filter(|(&(u, v), _)| !drop[u] && !drop[v])
            .map(|(_, &c)| c)
            .collect();
        // Surviving edges keep their relative order, which is the canonical
        // order of the relabeled graph, so the vectors stay parallel.
        Ok((Self::from_parts(graph, conductance)?, to_parent))
    }
}

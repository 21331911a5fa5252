use alloc::string::String;
use core::fmt;

/// Errors shared by every module in this crate.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Vertex index is not below the vertex count.
    IndexOutOfRange { index: usize, len: usize },
    /// A parameter failed validation; the message names it.
    Argument(String),
    /// An edge joins a vertex to itself.
    SelfLoop { vertex: usize },
    /// The same unordered pair appears twice in an edge list.
    DuplicateEdge { u: usize, v: usize },
    /// The operation needs at least one edge.
    EmptyEdgeSet,
    /// The vertex has no incident edge, so its strength (and any
    /// walk step or boundary role) is undefined.
    IsolatedVertex { vertex: usize },
    /// The vertex lies in a component with no boundary vertex.
    UndefinedStart { vertex: usize },
    /// A walk batch exceeded its total step budget.
    BudgetExceeded { budget: u64 },
    /// Iteration hit the sweep limit before meeting the tolerance.
    NoConvergence { iterations: usize, residual: f64 },
    /// Every defined vertex is a boundary vertex; no interior to report on.
    EmptyInterior,
    /// The interior is too large for the dense elimination route.
    InteriorTooLarge { size: usize, cap: usize },
    /// Numerical failure (e.g. a singular pivot).
    Numeric(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::IndexOutOfRange { index, len } => {
                write!(f, "vertex index {index} out of range for {len} vertices")
            }
            Error::Argument(msg) => write!(f, "invalid argument: {msg}"),
            Error::SelfLoop { vertex } => write!(f, "self-loop at vertex {vertex}"),
            Error::DuplicateEdge { u, v } => write!(f, "duplicate edge ({u}, {v})"),
            Error::EmptyEdgeSet => write!(f, "network has no edges"),
            Error::IsolatedVertex { vertex } => write!(f, "vertex {vertex} has no incident edge"),
            Error::UndefinedStart { vertex } => {
                write!(f, "vertex {vertex} is not connected to any boundary vertex")
            }
            Error::BudgetExceeded { budget } => {
                write!(f, "walk batch exceeded its step budget of {budget}")
            }
            Error::NoConvergence { iterations, residual } => write!(
                f,
                "no convergence after {iterations} sweeps (residual {residual:e})"
            ),
            Error::EmptyInterior => write!(f, "no interior vertices to report on"),
            Error::InteriorTooLarge { size, cap } => {
                write!(f, "interior size {size} exceeds dense solver cap {cap}")
            }
            Error::Numeric(msg) => write!(f, "numerical failure: {msg}"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;

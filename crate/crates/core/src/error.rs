use alloc::string::String;
use core::fmt;

/// Errors raised by graph construction, discretization, functionals and the solver.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    DisconnectedGraph,
    /// No unbounded edge: the graph is compact.
    CompactGraph,
    NonpositiveLength { edge: String, length: f64 },
    DanglingEndpoint { edge: String, vertex: String },
    DuplicateId(String),
    /// A halfline must have exactly one attachment vertex.
    MalformedHalfline { edge: String },
    EdgeNotInGraph(usize),
    NoBoundedEdge,
    NotBounded { edge: String },
    OutOfRange { edge: String, x: f64 },
    InvalidPotential { edge: String, reason: &'static str },
    PotentialBelowFloor { edge: String, x: f64, value: f64, floor: f64 },
    PotentialDoesNotDecay { edge: String, x: f64, value: f64 },
    AsymmetricPotential { x: f64 },
    InvalidParameter { name: &'static str, value: f64 },
    ExponentOutOfRange(f64),
    ResolutionTooCoarse { edge: String, cells: usize },
    MeshMismatch,
    ZeroMass,
    NegativeValues,
    LevelOutOfRange { level: f64, sup: f64 },
    LinearSolveFailure { row: usize, pivot: f64 },
    StepCollapse,
    EdgeTooShortForMass { edge: String, retained: f64 },
    LocalizationLost { edge: String, restarts: usize },
    NotConverged { iterations: usize, residual: f64 },
    SelfCheckFailed { check: &'static str, value: f64 },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::DisconnectedGraph => write!(f, "graph is not connected"),
            Error::CompactGraph => write!(f, "graph has no unbounded edge"),
            Error::NonpositiveLength { edge, length } => {
                write!(f, "edge {edge} has nonpositive length {length}")
            }
            Error::DanglingEndpoint { edge, vertex } => {
                write!(f, "edge {edge} references unknown vertex {vertex}")
            }
            Error::DuplicateId(id) => write!(f, "duplicate id {id}"),
            Error::MalformedHalfline { edge } => {
                write!(f, "unbounded edge {edge} must have exactly one endpoint")
            }
            Error::EdgeNotInGraph(idx) => write!(f, "edge index {idx} is not in the graph"),
            Error::NoBoundedEdge => write!(f, "graph has no bounded edge"),
            Error::NotBounded { edge } => write!(f, "edge {edge} is unbounded"),
            Error::OutOfRange { edge, x } => {
                write!(f, "coordinate {x} outside the range of edge {edge}")
            }
            Error::InvalidPotential { edge, reason } => {
                write!(f, "invalid potential on edge {edge}: {reason}")
            }
            Error::PotentialBelowFloor { edge, x, value, floor } => write!(
                f,
                "potential on edge {edge} at x={x} is {value}, below the floor {floor}"
            ),
            Error::PotentialDoesNotDecay { edge, x, value } => write!(
                f,
                "potential on halfline {edge} is {value} at x={x}, beyond the decay radius"
            ),
            Error::AsymmetricPotential { x } => {
                write!(f, "potential on the line is not even (mismatch at |x|={x})")
            }
            Error::InvalidParameter { name, value } => {
                write!(f, "invalid value {value} for parameter {name}")
            }
            Error::ExponentOutOfRange(p) => write!(f, "exponent p={p} is outside (2, 6)"),
            Error::ResolutionTooCoarse { edge, cells } => {
                write!(f, "edge {edge} gets only {cells} cells at this resolution")
            }
            Error::MeshMismatch => write!(f, "function and operator live on different meshes"),
            Error::ZeroMass => write!(f, "function has zero mass"),
            Error::NegativeValues => write!(f, "function has negative values"),
            Error::LevelOutOfRange { level, sup } => {
                write!(f, "level {level} is outside (0, {sup})")
            }
            Error::LinearSolveFailure { row, pivot } => {
                write!(f, "factorization broke down at row {row} (pivot {pivot})")
            }
            Error::StepCollapse => write!(f, "step size collapsed after 30 halvings"),
            Error::EdgeTooShortForMass { edge, retained } => write!(
                f,
                "edge {edge} retains only {:.1}% of the soliton mass",
                100.0 * retained
            ),
            Error::LocalizationLost { edge, restarts } => write!(
                f,
                "maximum left edge {edge} after {restarts} restarts"
            ),
            Error::NotConverged { iterations, residual } => write!(
                f,
                "no convergence after {iterations} iterations (residual {residual:e})"
            ),
            Error::SelfCheckFailed { check, value } => {
                write!(f, "soliton self-check {check} failed ({value:e})")
            }
        }
    }
}

impl core::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;

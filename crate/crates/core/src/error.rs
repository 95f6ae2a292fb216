use thiserror::Error;

/// Errors raised while building or editing plane graphs.
#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("graph is not simple: {0}")]
    NonSimple(String),
    #[error("inconsistent rotation system: {0}")]
    InconsistentRotation(String),
    #[error("designated outer face is not a face of the embedding")]
    OuterFaceNotAFace,
    #[error("Euler relation violated: {0}")]
    EulerViolation(String),
    #[error("no such edge ({0}, {1})")]
    NoSuchEdge(u32, u32),
    #[error("face {0} does not exist")]
    NotAFace(usize),
    #[error("vertices {0} and {1} are not cofacial on face {2}")]
    NotCofacial(u32, u32, usize),
    #[error("vertex or edge not on the cycle")]
    NotOnCycle,
    #[error("graph is not 2-connected")]
    NotTwoConnected,
    #[error("pair is not a separator")]
    NotASeparator,
    #[error("vertices lie in different components")]
    Disconnected,
    #[error("invalid input: {0}")]
    Invalid(String),
}

/// Errors raised by the path solver.
#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum SolveError {
    #[error("invalid query: {0}")]
    InvalidQuery(String),
    /// A structural fact promised by the construction failed at runtime.
    /// Signals a bug, never an expected condition.
    #[error("internal assertion failed: {0}")]
    Internal(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Errors raised by the brute-force oracle.
#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("graph too large for exhaustive search: n={n} exceeds cap {cap}")]
    TooLarge { n: usize, cap: usize },
    #[error("malformed path: {0}")]
    MalformedPath(String),
}

/// Errors raised by instance generators.
#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum GenError {
    #[error("unknown named instance: {0}")]
    UnknownName(String),
    #[error("infeasible generator spec: {0}")]
    InfeasibleSpec(String),
}

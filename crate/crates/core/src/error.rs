use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimension {0}: must be at least 2")]
    InvalidDimension(usize),

    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    #[error("matrix is not Hermitian (deviation {0:e})")]
    NotHermitian(f64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("nonphysical state: {0}")]
    NonphysicalState(String),

    #[error("invalid measurement: {0}")]
    InvalidMeasurement(String),

    #[error("unknown polyhedron `{0}`")]
    UnknownPolyhedron(String),

    #[error("degenerate point set: {0}")]
    DegenerateHull(String),

    #[error("origin is not interior to the hull (smallest offset {0:e})")]
    OriginNotInterior(f64),

    #[error("strategy count overflows 64 bits")]
    Unrepresentable,

    #[error("index {index} out of range for {count} strategies")]
    IndexOutOfRange { index: u64, count: u64 },

    #[error("cannot draw {requested} distinct strategies from a population of {population}")]
    PopulationExceeded { requested: u64, population: u64 },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("LP solver failure: {0}")]
    Solver(String),

    /// Solver failure inside the iterative exploration; `trace` holds the
    /// visibilities reached before the failure.
    #[error("iteration {iteration} aborted: {reason}")]
    IterationAborted { iteration: usize, reason: String, trace: Vec<f64> },

    #[error("conic solver failure: {0}")]
    ConicSolver(String),
}

pub type Result<T> = std::result::Result<T, Error>;

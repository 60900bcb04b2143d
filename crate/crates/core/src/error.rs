use thiserror::Error;

/// Errors shared by every layer of the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("total dimension {0} exceeds the guard of {1}")]
    DimensionGuard(usize, usize),
    #[error("Kraus completeness violated by {0:.3e}")]
    CompletenessViolation(f64),
    #[error("matrix deviates from Hermitian by {0:.3e}")]
    NotHermitian(f64),
    #[error("matrix has eigenvalue {0:.3e} below the PSD tolerance")]
    NotPsd(f64),
    #[error("trace is {0}, expected 1 within tolerance")]
    BadTrace(f64),
    #[error("input marginal deviates from the uniform state by {0:.3e}")]
    BadMarginal(f64),
    #[error("epsilon {0} outside [0, 1)")]
    EpsilonOutOfRange(f64),
    #[error("unsupported dimensions: {0}")]
    UnsupportedDims(String),
    #[error("solver failure: {0}")]
    SolverFailure(String),
    #[error("no registered constants or target data: {0}")]
    MissingTarget(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

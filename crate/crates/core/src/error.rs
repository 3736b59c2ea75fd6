use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("shape does not fit the maximal tree of depth {depth}")]
    Capacity { depth: usize },
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("not applicable: {0}")]
    NotApplicable(String),
    #[error("complexity guard: {0}")]
    ComplexityGuard(String),
    #[error("infeasible triangle with sides ({0}, {1}, {2})")]
    InfeasibleTriangle(f64, f64, f64),
    #[error("invalid input: {0}")]
    Input(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// The nonlinearity fails a structural requirement (f(0) >= 0, positivity for p > 2, ...).
    #[error("nonlinearity rejected: {0}")]
    Rejected(String),

    #[error("no convergence: {0}")]
    NotConverged(String),

    /// A boundary-value search found no admissible solution; a result, not a malfunction.
    #[error("no solution found: {0}")]
    NoSolutionFound(String),

    #[error("bracketing failed: {0}")]
    Bracket(String),

    #[error("matrix is not positive definite (pivot {0})")]
    NotPositiveDefinite(usize),

    #[error("malformed mesh file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

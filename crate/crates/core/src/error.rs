use thiserror::Error;

/// Errors produced by the solver.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("ill-conditioned system matrix (condition estimate {condition:.3e})")]
    IllConditioned { condition: f64 },

    #[error("physical inconsistency: {0}")]
    PhysicalInconsistency(String),

    #[error("assembly error: {0}")]
    Assembly(String),

    #[error("quadrature did not converge: {0}")]
    Quadrature(String),

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}

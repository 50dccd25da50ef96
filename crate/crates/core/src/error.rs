use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("unknown dimension tag `{0}`")]
    UnknownDimension(String),

    #[error("step size {dt} exceeds the limit {limit} ({reason})")]
    StepSize { dt: f64, limit: f64, reason: &'static str },

    #[error("velocity {speed} exceeds the non-relativistic limit {limit}")]
    Relativistic { speed: f64, limit: f64 },

    #[error("bound violated at t = {time}: |dE/dt| = {power} > {bound}")]
    BoundViolation { time: f64, power: f64, bound: f64 },

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("schema: {0}")]
    Schema(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}

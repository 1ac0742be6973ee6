use std::io;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Two objects that must share a domain (or a shape) do not.
    #[error("structural error: {0}")]
    Structural(String),

    /// An object could not be built because its data violates an invariant.
    #[error("construction error: {0}")]
    Construction(String),

    /// A computation would leave the representable floating-point range.
    #[error("range error: {0}")]
    Range(String),

    /// A scenario precondition is not met by its configuration.
    #[error("precondition error: {0}")]
    Precondition(String),

    #[error("solver did not converge after {iterations} iterations (relative residual {residual:e})")]
    Solver { iterations: usize, residual: f64 },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    /// `true` for errors that stem from bad user input rather than numerics.
    pub fn is_config(&self) -> bool {
        matches!(self, Error::Config(_) | Error::Io(_) | Error::Precondition(_))
    }
}

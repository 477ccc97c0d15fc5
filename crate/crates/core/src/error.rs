use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("unsupported operation: {0}")]
    Unsupported(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("numeric failure: {what} (achieved tolerance {achieved:e})")]
    Numeric { what: String, achieved: f64 },

    #[error("capacity exceeded: {what} (smallest supported value {min_supported:e})")]
    Capacity { what: String, min_supported: f64 },

    #[error("certificate failed at lag {lag}: |R| = {value:e} exceeds {limit:e}")]
    Certificate { lag: f64, value: f64, limit: f64 },

    #[error("property violation: {0}")]
    Property(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn numeric(what: impl Into<String>, achieved: f64) -> Self {
        Error::Numeric { what: what.into(), achieved }
    }

    pub(crate) fn precondition(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }

    /// True for errors that signal a numerical method did not reach its tolerance.
    pub fn is_numeric(&self) -> bool {
        matches!(self, Error::Numeric { .. })
    }
}

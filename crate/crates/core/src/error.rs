use thiserror::Error;

/// Errors raised anywhere in the sampling, optimization and benchmark stack.
#[derive(Debug, Error)]
pub enum HdsError {
    /// A parameter combination that can never produce a valid result.
    #[error("invalid configuration: {0}")]
    Config(String),
    /// An argument outside the mathematical domain of a function.
    #[error("domain error: {0}")]
    Domain(String),
    /// Persisted state that is inconsistent with the requested run.
    #[error("state error: {0}")]
    State(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = HdsError> = std::result::Result<T, E>;

pub(crate) fn config_err<T>(msg: impl Into<String>) -> Result<T> {
    Err(HdsError::Config(msg.into()))
}

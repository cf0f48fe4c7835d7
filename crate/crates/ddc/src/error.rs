use thiserror::Error;

/// Failures of a subcommand, each mapped to a process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid arguments: {0}")]
    InvalidArgs(String),
    #[error("dimension violation: {0}")]
    Dimension(String),
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("validation failed: {0}")]
    ValidationFailed(String),
    #[error(transparent)]
    Core(#[from] ddc_core::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::InvalidArgs(_) => 2,
            CliError::Dimension(_) => 3,
            CliError::InvalidState(_) => 4,
            CliError::Core(ddc_core::Error::DimensionExceeded { .. } | ddc_core::Error::InputTruncation { .. }) => 3,
            CliError::Core(ddc_core::Error::InvalidState { .. }) => 4,
            CliError::Core(ddc_core::Error::InvalidParams(_)) => 2,
            _ => 1,
        }
    }
}

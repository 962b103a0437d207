use thiserror::Error;

pub type CliResult<T> = Result<T, CliError>;

/// Errors split by exit code: configuration problems (bad flags, missing
/// paths, unreadable config) exit 2, data problems (format errors, grid or
/// date mismatches, degenerate inputs) exit 3.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),

    #[error("{0}")]
    Data(String),

    #[error(transparent)]
    Core(#[from] meltkit_core::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Data(_) | CliError::Core(_) => 3,
        }
    }
}

pub fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

pub fn data_err(msg: impl Into<String>) -> CliError {
    CliError::Data(msg.into())
}

use eulerlab_core::Error as CoreError;
use thiserror::Error;

/// Exit status of a successful command.
pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_INADMISSIBLE: i32 = 3;
pub const EXIT_NUMERICAL: i32 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("admissibility rejected: {}", .0.join("; "))]
    Inadmissible(Vec<String>),

    #[error("numerical failure: {0}")]
    Numerical(CoreError),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type CliResult<T> = Result<T, CliError>;

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::InvalidGrid(m) | CoreError::InvalidParams(m) | CoreError::Dimension(m) => CliError::Config(m),
            CoreError::Domain(m) => CliError::Config(m),
            CoreError::Inadmissible(m) => CliError::Inadmissible(vec![m]),
            other => CliError::Numerical(other),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io(_) => EXIT_CONFIG,
            CliError::Inadmissible(_) => EXIT_INADMISSIBLE,
            CliError::Numerical(_) => EXIT_NUMERICAL,
        }
    }

    /// Stable machine-readable tag.
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config_invalid",
            CliError::Inadmissible(_) => "admissibility_rejected",
            CliError::Numerical(_) => "numerical_failure",
            CliError::Io(_) => "io_error",
        }
    }
}

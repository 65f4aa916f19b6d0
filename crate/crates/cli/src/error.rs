use std::path::PathBuf;

use obproj_core::Error as CoreError;

pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_IO: i32 = 4;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),
    /// Schema or syntax problem in an input document; `context` names the
    /// offending field or line.
    #[error("{path}: {context}: {message}")]
    Input {
        path: PathBuf,
        context: String,
        message: String,
    },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Core(#[from] CoreError),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Input { .. } => EXIT_CONFIG,
            CliError::Io { .. } => EXIT_IO,
            CliError::Core(e) => match e {
                CoreError::DirectSumViolation { .. } | CoreError::NumericalDegeneracy(_) => {
                    EXIT_NUMERICAL
                }
                _ => EXIT_CONFIG,
            },
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

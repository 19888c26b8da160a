use std::io;
use std::path::PathBuf;

use gctrl_core::error::Error as CoreError;

use crate::csvio::ReadError;

#[derive(Debug, thiserror::Error)]
pub enum AppError {
    #[error("{path}:{line}: {msg}")]
    ConfigLine { path: String, line: usize, msg: String },
    #[error("{0}")]
    Config(String),
    /// A run stopped on a numerical error.
    #[error("numerical failure: {0}")]
    Numerical(CoreError),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("{}: {source}", path.display())]
    Csv { path: PathBuf, source: csv::Error },
    /// An input CSV could not be read or has the wrong content.
    #[error("{}: {source}", path.display())]
    Read { path: PathBuf, source: ReadError },
}

impl AppError {
    /// Process exit code: 2 for bad configuration or input, 3 for numerical
    /// failures, 1 for IO.
    pub fn exit_code(&self) -> u8 {
        match self {
            AppError::ConfigLine { .. } | AppError::Config(_) => 2,
            AppError::Numerical(_) => 3,
            AppError::Read { source: ReadError::Csv(e), .. } if e.is_io_error() => 1,
            AppError::Read { .. } => 2,
            AppError::Io { .. } | AppError::Csv { .. } => 1,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        AppError::Io { path: path.into(), source }
    }

    pub fn csv(path: impl Into<PathBuf>, source: csv::Error) -> Self {
        AppError::Csv { path: path.into(), source }
    }
}

impl From<CoreError> for AppError {
    fn from(e: CoreError) -> Self {
        if e.is_config() {
            AppError::Config(e.to_string())
        } else {
            AppError::Numerical(e)
        }
    }
}

pub type Result<T> = std::result::Result<T, AppError>;

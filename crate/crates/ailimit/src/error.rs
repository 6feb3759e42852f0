use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = AppError> = std::result::Result<T, E>;

/// Failure classes of a batch run, each with its own process exit code.
#[derive(Debug, Error)]
pub enum AppError {
    #[error("bad input: {0}")]
    BadInput(String),
    #[error("numerical failure: {0}")]
    Numerical(#[source] ailimit_core::Error),
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
}

impl AppError {
    pub fn exit_code(&self) -> i32 {
        match self {
            AppError::BadInput(_) => 2,
            AppError::Numerical(_) => 3,
            AppError::Io { .. } => 4,
        }
    }

    pub fn bad(msg: impl Into<String>) -> Self {
        AppError::BadInput(msg.into())
    }

    pub fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        AppError::Io { path: path.into(), source }
    }
}

/// Parse errors and invalid parameters are the caller's fault; everything else
/// the core reports is a numerical failure.
impl From<ailimit_core::Error> for AppError {
    fn from(e: ailimit_core::Error) -> Self {
        use ailimit_core::Error as E;
        match e {
            E::Parse { .. } | E::EmptySequence | E::InvalidParameter(_) | E::GridMismatch => {
                AppError::BadInput(e.to_string())
            }
            other => AppError::Numerical(other),
        }
    }
}

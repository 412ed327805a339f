use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Validation(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("thread pool: {0}")]
    ThreadPool(#[from] rayon::ThreadPoolBuildError),
    #[error(transparent)]
    Core(#[from] sobolev_core::Error),
    #[error("{file}: {message}")]
    Malformed { file: String, message: String },
}

impl CliError {
    /// 2 for problems with the requested configuration, 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        use sobolev_core::Error as E;
        match self {
            CliError::Validation(_) => 2,
            CliError::Core(E::InvalidArgument(_) | E::DimensionMismatch { .. } | E::Unsupported(_)) => 2,
            _ => 1,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

pub(crate) fn ensure(cond: bool, msg: impl FnOnce() -> String) -> CliResult<()> {
    if cond {
        Ok(())
    } else {
        Err(CliError::Validation(msg()))
    }
}

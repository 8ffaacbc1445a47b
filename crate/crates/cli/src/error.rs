use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage error: {0}")]
    Usage(String),
    #[error("config error in {path}: {message}")]
    Config { path: PathBuf, message: String },
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Core(#[from] iga_gap_core::Error),
    #[error("{0}")]
    Failed(String),
}

impl CliError {
    /// 0 success, 1 usage/parse, 2 numerical, 3 domain.
    pub fn exit_code(&self) -> i32 {
        use iga_gap_core::Error as E;
        match self {
            CliError::Usage(_) | CliError::Config { .. } | CliError::Io { .. } => 1,
            CliError::Core(E::Parse(_)) => 1,
            CliError::Core(E::Domain(_)) | CliError::Failed(_) => 3,
            CliError::Core(_) => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

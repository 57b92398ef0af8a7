use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] coherence_core::Error),
    #[error("fixture error: {0}")]
    Fixture(String),
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("cannot write {path}: {source}")]
    Write { path: PathBuf, source: std::io::Error },
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("csv output failed: {0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    /// 2 for unreadable or malformed input, 3 for oversized dimensions,
    /// 4 for anything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(coherence_core::Error::DimensionTooLarge { .. }) => 3,
            CliError::Core(coherence_core::Error::StateFile { .. }) | CliError::Read { .. } | CliError::Argument(_) => {
                2
            }
            _ => 4,
        }
    }
}

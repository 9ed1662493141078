use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Core(#[from] hgsl_core::Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}, line {line}: {message}")]
    Row {
        path: PathBuf,
        line: u64,
        message: String,
    },
    #[error("{path}: {message}")]
    File { path: PathBuf, message: String },
    #[error("invalid config: {0}")]
    Config(String),
    #[error("all {trials} trials failed; first: {first}")]
    AllTrialsFailed { trials: usize, divergent: bool, first: String },
}

impl HarnessError {
    /// 2 when every trial diverged, 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::AllTrialsFailed { divergent: true, .. } => 2,
            _ => 1,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io { path: path.into(), source }
    }

    pub(crate) fn file(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        Self::File { path: path.into(), message: message.into() }
    }
}

pub type Result<T> = std::result::Result<T, HarnessError>;

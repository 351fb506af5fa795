use std::path::PathBuf;

use saliency_core::ErrorClass;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration:\n  {}", .0.join("\n  "))]
    Config(Vec<String>),

    #[error("{usage}")]
    Usage { usage: String },

    #[error("missing {artifact}; run `saliency {producer}` first")]
    MissingArtifact { artifact: PathBuf, producer: String },

    #[error("{artifact} does not match the manifest of `saliency {producer}`; re-run `saliency {producer}`")]
    Stale { artifact: PathBuf, producer: String },

    #[error("stale artifacts:\n  {}", .0.join("\n  "))]
    StaleInputs(Vec<String>),

    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },

    #[error(transparent)]
    Core(#[from] saliency_core::Error),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit status: 1 usage or config, 2 data, 3 internal invariant.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Usage { .. } | CliError::MissingArtifact { .. } => 1,
            CliError::Core(e) => match e.class() {
                ErrorClass::Usage => 1,
                ErrorClass::Data => 2,
                ErrorClass::Invariant => 3,
            },
            _ => 2,
        }
    }
}

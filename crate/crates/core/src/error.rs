use std::io;
use std::path::PathBuf;

use thiserror::Error;

use crate::stats::StatsError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Coarse classification used by front ends to pick an exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    /// Bad or inconsistent input data.
    Data,
    /// An internal invariant was violated.
    Invariant,
    /// The caller asked for something that cannot be done as stated.
    Usage,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },

    #[error("{}:{line}: {message}", file.display())]
    Parse {
        file: PathBuf,
        line: usize,
        message: String,
    },

    #[error("integrity error: {0}")]
    Integrity(String),

    #[error("unknown synset `{0}`")]
    UnknownSynset(String),

    #[error("synset `{synset}` reaches more than one configured root: {}", roots.join(", "))]
    MultipleRoots { synset: String, roots: Vec<String> },

    #[error("edit `{edit}` (line {line}) rejected: {reason}")]
    Edit {
        line: usize,
        edit: String,
        reason: String,
    },

    #[error("unknown caption `{0}`")]
    UnknownCaption(String),

    #[error("no presence annotation for image `{0}`")]
    MissingPresence(String),

    #[error("unknown language `{0}`")]
    UnknownLanguage(String),

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error(transparent)]
    Stats(#[from] StatsError),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(file: impl Into<PathBuf>, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            file: file.into(),
            line,
            message: message.into(),
        }
    }

    pub fn class(&self) -> ErrorClass {
        match self {
            Error::Integrity(_) => ErrorClass::Invariant,
            Error::Invalid(_) => ErrorClass::Usage,
            _ => ErrorClass::Data,
        }
    }
}

use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("sidecar {path}: {reason}")]
    Sidecar { path: PathBuf, reason: String },

    #[error("data length mismatch: expected {expected} bytes, found {actual}")]
    DataLength { expected: usize, actual: usize },

    #[error("unknown phase encoding: {0}")]
    UnknownEncoding(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("constant-intensity volume: no threshold separates two classes")]
    DegenerateThreshold,

    #[error("volume too small: {0}")]
    TooSmall(String),

    #[error("nothing to reconstruct: {0}")]
    NothingToReconstruct(String),

    #[error("empty dictionary")]
    EmptyDictionary,

    #[error("malformed dictionary file: {0}")]
    Format(String),

    #[error("incompatible reports: {0}")]
    Incompatible(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

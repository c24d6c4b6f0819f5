use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid world model: {0}")]
    InvalidModel(String),

    #[error("invalid speaker: {0}")]
    InvalidSpeaker(String),

    #[error("unknown sentence {0:?}")]
    UnknownSentence(String),

    #[error("world {world} is not consistent with the context")]
    InconsistentContext { world: usize },

    #[error("sequence is already terminated")]
    Terminated,

    #[error("enumeration cap exceeded: {0}")]
    EnumerationCap(String),

    #[error("degenerate probability: {term} has probability zero")]
    DegenerateProbability { term: &'static str },

    #[error("semantic value undefined: premise has probability zero in every world")]
    UndefinedSemanticValue,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },

    #[error("score cache corrupted at line {line}: {message}")]
    CacheCorrupted { line: usize, message: String },

    #[error("score cache miss for {0:?}")]
    CacheMiss(String),

    #[error("remote scoring failed: {0}")]
    Remote(String),

    #[error("transport error: {0}")]
    Transport(String),

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Stable machine-readable tag, used in CLI error JSON.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidModel(_) => "invalid_model",
            Error::InvalidSpeaker(_) => "invalid_speaker",
            Error::UnknownSentence(_) => "unknown_sentence",
            Error::InconsistentContext { .. } => "inconsistent_context",
            Error::Terminated => "terminated",
            Error::EnumerationCap(_) => "enumeration_cap",
            Error::DegenerateProbability { .. } => "degenerate_probability",
            Error::UndefinedSemanticValue => "undefined_semantic_value",
            Error::InvalidArgument(_) => "invalid_argument",
            Error::Parse { .. } => "parse",
            Error::CacheCorrupted { .. } => "cache_corrupted",
            Error::CacheMiss(_) => "cache_miss",
            Error::Remote(_) => "remote",
            Error::Transport(_) => "transport",
            Error::Io { .. } => "io",
            Error::Json(_) => "json",
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

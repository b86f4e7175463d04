use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the modeling pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid weight sequence: {0}")]
    InvalidWeights(String),
    #[error("invalid sampler config: {0}")]
    InvalidSampler(String),
    #[error("invalid config: {0}")]
    Config(String),
    #[error("comment {0} has tokens but no popularity score")]
    MissingScore(usize),
    #[error("unknown comment id `{0}`")]
    UnknownComment(String),
    #[error("thread `{thread}` rejected: {reason}")]
    Thread { thread: String, reason: String },
    #[error("empty reference corpus")]
    EmptyReference,
    #[error("need at least 2 top words, got {0}")]
    TooFewWords(usize),
    #[error("term `{0}` not tracked by the coherence index")]
    UntrackedTerm(String),
    #[error("window size {0} not indexed")]
    UnindexedWindow(usize),
    #[error("cannot merge indexes built with different terms or windows")]
    IndexMismatch,
    #[error("coverage mismatch: {0}")]
    Coverage(String),
    #[error("checkpoint does not match corpus: {0}")]
    Checkpoint(String),
    #[error("malformed record on line {line}: {reason}")]
    Record { line: usize, reason: String },
    #[error("{}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True when the failure stems from user input or configuration rather
    /// than from a bug.
    pub fn is_input_error(&self) -> bool {
        !matches!(self, Error::MissingScore(_) | Error::IndexMismatch)
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

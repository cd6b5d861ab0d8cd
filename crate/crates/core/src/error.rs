use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error("{context}: invalid UTF-8 at byte offset {offset}")]
    Utf8 { context: String, offset: usize },

    #[error("{context}:{line}: {message}")]
    Parse {
        context: String,
        line: usize,
        message: String,
    },

    #[error("checkpoint format: {0}")]
    Format(String),

    #[error("word not in vocabulary: {0:?}")]
    OutOfVocabulary(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("empty vocabulary")]
    EmptyVocabulary,

    #[error("empty corpus: {0}")]
    EmptyCorpus(String),

    #[error("training diverged at step {step}: {detail}")]
    Diverged { step: u64, detail: String },

    #[error("cannot evaluate: {0}")]
    Evaluation(String),

    #[error("{task}: only {usable} usable items ({oov} excluded as out-of-vocabulary)")]
    Insufficient {
        task: &'static str,
        usable: usize,
        oov: usize,
    },

    #[error("zero vector for {0:?} cannot be normalized")]
    ZeroVector(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(context: impl Into<String>, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            context: context.into(),
            line,
            message: message.into(),
        }
    }
}

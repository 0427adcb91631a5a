use std::io;

use thiserror::Error;

/// Errors raised by corpus handling, training and evaluation.
#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error: {0}")]
    Io(#[from] io::Error),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("vocabulary is empty (no word reaches min_count {min_count})")]
    EmptyVocabulary { min_count: u64 },

    #[error("corpus contains no in-vocabulary tokens")]
    EmptyCorpus,

    #[error("noise table size {size} is smaller than the vocabulary ({vocab})")]
    NoiseTableTooSmall { size: usize, vocab: usize },

    #[error("malformed vector file header: {0}")]
    MalformedHeader(String),

    #[error("line {line}: expected {expected} components, found {found}")]
    DimensionMismatch {
        line: usize,
        expected: usize,
        found: usize,
    },

    #[error("vector file truncated: {0}")]
    Truncated(String),

    #[error("malformed data at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("word `{0}` is not in the vocabulary")]
    UnknownWord(String),

    #[error("correlation undefined: {0}")]
    UndefinedCorrelation(String),

    #[error("no evaluation item had all words in the vocabulary ({skipped} skipped)")]
    NothingToEvaluate { skipped: usize },

    #[error("non-finite value in embeddings after epoch {epoch}")]
    NonFinite { epoch: usize },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

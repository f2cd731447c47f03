use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Io(#[from] io::Error),

    #[error("corpus contains no tokens")]
    EmptyCorpus,

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("bad teacher file magic {found:?}, expected \"CTXV\"")]
    BadMagic { found: [u8; 4] },

    #[error("unsupported teacher file version {0}")]
    UnsupportedVersion(u32),

    #[error("teacher file truncated in sentence {sentence_id}")]
    Truncated { sentence_id: u64 },

    #[error("non-finite teacher value in sentence {sentence_id}")]
    NonFinite { sentence_id: u64 },

    #[error("sentence {sentence_id}: teacher has {found} vectors but the corpus line has {expected} tokens")]
    LengthMismatch {
        sentence_id: u64,
        expected: usize,
        found: usize,
    },

    #[error("teacher/corpus misalignment at sentence {sentence_id}: {message}")]
    Misaligned { sentence_id: u64, message: String },

    #[error("word not in vocabulary: {0}")]
    OutOfVocabulary(String),

    #[error("insufficient coverage: {covered} usable items, at least {required} required")]
    Coverage { covered: usize, required: usize },

    #[error("training diverged: non-finite parameter after epoch {epoch}")]
    Diverged { epoch: usize },

    #[error("checkpoint: {0}")]
    Checkpoint(String),
}

impl Error {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }
}

use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors produced by dataset ingestion and the evaluation operations.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {msg}")]
    Malformed {
        path: String,
        line: usize,
        msg: String,
    },

    #[error("duplicate record for ({doc}, {system})")]
    DuplicateKey { doc: String, system: String },

    #[error("dataset contains no records")]
    EmptyDataset,

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("need at least {needed} {what}, got {got}")]
    TooFew {
        what: &'static str,
        needed: usize,
        got: usize,
    },

    #[error("annotator index {index} out of range for {n_annotators} annotators")]
    AnnotatorOutOfRange { index: usize, n_annotators: usize },

    #[error("annotator score vectors are not aligned across records")]
    UnalignedAnnotators,

    #[error("coverage mismatch: {0}")]
    Coverage(String),

    #[error("missing score for ({doc}, {system})")]
    MissingScore { doc: String, system: String },

    #[error("{0}")]
    InvalidArgument(String),

    #[error("system {better} does not have a strictly higher mean human score than {worse}")]
    NotBetterSystem { better: String, worse: String },

    #[error("every bootstrap resample statistic was undefined")]
    AllResamplesUndefined,

    #[error("document {0} has no second distinct sentence ordering")]
    NotShuffleable(String),

    #[error("unknown variant id {0}")]
    UnknownVariant(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn malformed(path: impl Into<String>, line: usize, msg: impl Into<String>) -> Self {
        Error::Malformed {
            path: path.into(),
            line,
            msg: msg.into(),
        }
    }
}

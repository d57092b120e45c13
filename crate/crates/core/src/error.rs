use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("I/O error: {0}")]
    Stream(#[from] std::io::Error),

    #[error("malformed line {line_no}: {reason}")]
    MalformedLine { line_no: usize, reason: String },

    #[error("unknown semantic field name `{0}`")]
    UnknownFieldName(String),

    #[error("lexicon admitted no word forms")]
    EmptyLexicon,

    #[error("no .txt documents found under {0}")]
    EmptyCorpus(PathBuf),

    #[error("{0} is not valid UTF-8")]
    Encoding(PathBuf),

    #[error("document {doc_id} has no tokens in any semantic field")]
    EmptySemanticColumn { doc_id: usize },

    #[error("index {index} out of range (len {len})")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("SVD did not converge after {sweeps} sweeps")]
    NoConvergence { sweeps: usize },

    #[error("retained dimension {k} outside 1..={rank}")]
    RankOutOfRange { k: usize, rank: usize },

    #[error("clustering needs at least 2 vectors, got {0}")]
    TooFewVectors(usize),

    #[error("non-finite value in input vector {0}")]
    NonFinite(usize),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("assignment covers {assignment} documents but corpus has {corpus}")]
    IdMismatch { assignment: usize, corpus: usize },

    #[error("Lance-Williams cross-check failed at step {step}: maintained {maintained}, direct {direct}")]
    CrossCheck {
        step: usize,
        maintained: f64,
        direct: f64,
    },

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("config error: {0}")]
    Config(String),

    #[error("stage `{stage}` failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn in_stage(self, stage: &'static str) -> Self {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }

    /// Process exit status for the CLI: 2 for data/format errors, 3 for
    /// numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Stage { source, .. } => source.exit_code(),
            Error::NoConvergence { .. } | Error::EmptySemanticColumn { .. } => 3,
            _ => 2,
        }
    }
}

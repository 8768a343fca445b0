use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("trajectory is empty")]
    EmptyTrajectory,

    #[error("non-finite value in {what}")]
    NonFinite { what: &'static str },

    #[error("duplicate sample id {0}")]
    DuplicateSampleId(u64),

    #[error("class count must be at least 1")]
    ZeroClasses,

    #[error("cluster count k = {k} exceeds the number of rows ({n_rows})")]
    TooManyClusters { k: usize, n_rows: usize },

    #[error("non-finite feature value at row {row}, column {col}")]
    NonFiniteFeature { row: usize, col: usize },

    #[error("row count mismatch: {what} has {got} rows, expected {expected}")]
    RowMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid feature matrix: {0}")]
    InvalidMatrix(String),

    #[error("class ids are not dense: {0}")]
    NonDenseClasses(String),

    #[error("sample id {0} not found")]
    UnknownSample(u64),

    #[error("prediction/ground-truth misalignment at position {index}: {pred_id} vs {gt_id}")]
    Misaligned {
        index: usize,
        pred_id: u64,
        gt_id: u64,
    },

    #[error("normalized success rate is defined for top-1 predictions only (got {0} ranked classes)")]
    NsrRequiresTop1(usize),

    #[error("class {0} has no training samples")]
    EmptyClass(usize),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: u64,
        message: String,
    },

    #[error("{path}: bad magic bytes {found:?}, expected \"VPCF\"")]
    BadMagic { path: PathBuf, found: [u8; 4] },

    #[error("{path}: unsupported VPCF version {version}")]
    UnsupportedVersion { path: PathBuf, version: u32 },

    #[error("{path}: header truncated ({len} bytes, need 16)")]
    TruncatedHeader { path: PathBuf, len: usize },

    #[error("{path}: payload size mismatch: header declares {expected} bytes, found {actual}")]
    PayloadSize {
        path: PathBuf,
        expected: usize,
        actual: usize,
    },

    #[error("{path}: empty file")]
    EmptyFile { path: PathBuf },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, line: u64, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            message: message.into(),
        }
    }
}

use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid layer spec: {0}")]
    InvalidSpec(String),

    #[error("shape mismatch: expected {expected}, got {got}")]
    ShapeMismatch { expected: usize, got: usize },

    #[error("label {label} out of range for {n_classes} classes")]
    InvalidLabel { label: usize, n_classes: usize },

    #[error("dataset too small: {train} training samples for batch size {batch_size}")]
    DatasetTooSmall { train: usize, batch_size: usize },

    #[error("dataset needs at least two represented classes, found {0}")]
    TooFewClasses(usize),

    #[error("numeric failure: {0}")]
    NumericFailure(String),

    #[error("layer {layer} has no active synapse with nonzero weight")]
    DeadLayer { layer: usize },

    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    #[error("parse error at row {row}, column {column}: {message}")]
    Parse {
        row: usize,
        column: usize,
        message: String,
    },

    #[error("dataset is empty")]
    EmptyDataset,

    #[error("non-finite feature at row {row}, column {column}")]
    NonFiniteFeature { row: usize, column: usize },

    #[error("{path}: bad magic 0x{found:08X}, expected 0x{expected:08X}")]
    BadMagic {
        path: PathBuf,
        expected: u32,
        found: u32,
    },

    #[error("image count {images} does not match label count {labels}")]
    CountMismatch { images: usize, labels: usize },

    #[error("{0}: truncated file")]
    TruncatedFile(PathBuf),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("unsupported model format version {0}")]
    FormatVersionUnsupported(u64),

    #[error("model integrity: {0}")]
    Integrity(String),

    #[error("malformed document: {0}")]
    Format(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by NaN/Inf values rather than malformed input.
    pub fn is_numeric(&self) -> bool {
        matches!(self, Error::NumericFailure(_))
    }
}

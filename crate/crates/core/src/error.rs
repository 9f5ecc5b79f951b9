use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the feature-learning pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("dataset file {path} is missing")]
    MissingFile { path: PathBuf },

    #[error("{path}: {len} bytes is not a whole number of {record}-byte records")]
    RecordSize { path: PathBuf, len: usize, record: usize },

    #[error("{path}: record {index} has label {label}, expected < {n_classes}")]
    LabelRange {
        path: PathBuf,
        index: usize,
        label: usize,
        n_classes: usize,
    },

    #[error("image/label count mismatch: {images} images, {labels} labels")]
    CountMismatch { images: usize, labels: usize },

    #[error("expected {expected} channels, got {got}")]
    Channels { expected: usize, got: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("value {value} at index {index} is outside [0, 1]")]
    OutOfRange { index: usize, value: f64 },

    #[error("timestamp {t} outside [{lo}, {hi}]")]
    Timestamp { t: f64, lo: f64, hi: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    #[error("classifier needs at least two classes, got {0}")]
    SingleClass(usize),

    #[error("bad file format in {path}: {reason}")]
    Format { path: PathBuf, reason: String },

    #[error("config error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        let path = path.into();
        if source.kind() == std::io::ErrorKind::NotFound {
            Error::MissingFile { path }
        } else {
            Error::Io { path, source }
        }
    }

    pub(crate) fn format(path: impl Into<PathBuf>, reason: impl Into<String>) -> Self {
        Error::Format {
            path: path.into(),
            reason: reason.into(),
        }
    }
}

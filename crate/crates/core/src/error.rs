use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("invalid dataset: {0}")]
    InvalidDataset(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("label {label} out of range 1..={num_classes}")]
    LabelOutOfRange { label: usize, num_classes: usize },
    #[error("split failed: class {class} absent from a partition after {attempts} attempts")]
    ClassAbsent { class: usize, attempts: usize },
    #[error("class {class}: every auxiliary weight vanished (u'1 = {weight_sum:e})")]
    DegenerateClass { class: usize, weight_sum: f64 },
    #[error("singular system for class {class} with alpha = 0")]
    Singular { class: usize },
    #[error("non-finite objective at iteration {iteration}")]
    NonFinite { iteration: usize },
    #[error("zero variance of paired differences")]
    DegenerateVariance,
    #[error("model file: {0}")]
    Model(String),
}

impl Error {
    /// Short stable identifier used in machine-readable error lines.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Io { .. } => "io",
            Error::Parse { .. } => "parse",
            Error::InvalidDataset(_) => "invalid_dataset",
            Error::InvalidArgument(_) => "invalid_argument",
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::LabelOutOfRange { .. } => "label_out_of_range",
            Error::ClassAbsent { .. } => "class_absent",
            Error::DegenerateClass { .. } => "degenerate_class",
            Error::Singular { .. } => "singular",
            Error::NonFinite { .. } => "non_finite",
            Error::DegenerateVariance => "degenerate_variance",
            Error::Model(_) => "model",
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

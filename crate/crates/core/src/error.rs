//! Error type shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Vector/matrix lengths disagree.
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// An argument violates a precondition.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A rank-based fit or sampler needs at least one observed failure.
    #[error("dataset contains no event subjects")]
    NoEvents,

    /// A pair index does not address a subject.
    #[error("index {index} out of range for length {len}")]
    IndexOutOfRange { index: usize, len: usize },

    /// The design matrix is rank deficient (or numerically so).
    #[error("singular design matrix: {0}")]
    SingularDesign(String),

    /// A metric has an empty denominator.
    #[error("undefined metric: {0}")]
    UndefinedMetric(String),

    /// A CSV column is missing or malformed at the schema level.
    #[error("schema error: {0}")]
    Schema(String),

    /// Filtering removed every row.
    #[error("empty dataset: {0}")]
    EmptyData(String),

    /// A train/test split could not place events on both sides.
    #[error("degenerate split: {0}")]
    DegenerateSplit(String),

    /// A persisted model container is malformed.
    #[error("model container error: {0}")]
    ModelFormat(String),

    /// A configuration file is malformed.
    #[error("config error: {0}")]
    Config(String),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

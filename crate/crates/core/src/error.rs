//! Error type shared across the crate.

use chrono::NaiveDate;

/// Everything that can go wrong while loading, correcting or analysing a
/// series. Callers that need exit-code semantics should map
/// [`Error::is_degeneracy`] to a distinct code.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("malformed row {row}: {message}")]
    MalformedRow { row: usize, message: String },

    #[error("non-monotone dates at row {row}: {date}")]
    NonMonotoneDates { row: usize, date: NaiveDate },

    #[error("cannot average at boundary: January 1 outlier at index {index}")]
    BoundaryCorrection { index: usize },

    #[error("gap touches series boundary")]
    GapAtBoundary,

    #[error("misaligned series: {0}")]
    Misaligned(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Numeric degeneracy: constant input, zero variance, no dispersion.
    #[error("degenerate: {0}")]
    Degenerate(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    /// Error annotated with the series and step it arose in. The inner
    /// error is folded into the message rather than exposed as a source,
    /// so reporters that walk the chain do not print it twice.
    #[error("{step} '{series}': {cause}")]
    InSeries {
        series: String,
        step: &'static str,
        cause: Box<Error>,
    },
}

impl Error {
    /// True for numeric-degeneracy failures, false for input/usage errors.
    pub fn is_degeneracy(&self) -> bool {
        match self {
            Error::Degenerate(_) => true,
            Error::InSeries { cause, .. } => cause.is_degeneracy(),
            _ => false,
        }
    }

    /// Annotate with the series label and processing step.
    pub fn in_series(self, series: &str, step: &'static str) -> Error {
        Error::InSeries {
            series: series.to_string(),
            step,
            cause: Box::new(self),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

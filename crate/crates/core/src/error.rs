use thiserror::Error;

/// Every failure the library can report.
///
/// Column and row indices carried by variants are 1-based so they can be shown
/// to users unchanged.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("non-finite value at row {row}, column {col}")]
    NonFinite { row: usize, col: usize },

    #[error("column {column} is linearly dependent on the preceding columns (pivot {pivot:e})")]
    RankDeficient { column: usize, pivot: f64 },

    #[error("weight matrix is not symmetric (max |W - W^T| = {max_asymmetry:e})")]
    NotSymmetric { max_asymmetry: f64 },

    #[error("singular system at elimination step {step} (pivot {pivot:e})")]
    SingularSystem { step: usize, pivot: f64 },

    #[error("index {index} out of range 1..={len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("need more rows than parameters: {rows} rows for {params} parameters")]
    InsufficientRows { rows: usize, params: usize },

    #[error("need at least 5 samples for an interaction test, got {samples}")]
    InsufficientSamples { samples: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error at row {row}, column {col}: {message}")]
    Parse {
        row: usize,
        col: usize,
        message: String,
    },

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// True for failures caused by a (numerically) singular system rather than
    /// malformed input.
    pub fn is_singular(&self) -> bool {
        matches!(self, Error::RankDeficient { .. } | Error::SingularSystem { .. })
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

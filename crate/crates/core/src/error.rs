use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The map has no complex-conjugate eigenvalue pair, so no eigenphase is defined.
    #[error("degenerate real spectrum: {0}")]
    DegenerateRealSpectrum(String),

    #[error("outcome probability {value} outside [0, 1]: invalid effect/state pair")]
    InvalidProbability { value: f64 },

    #[error("malformed dataset: {0}")]
    MalformedDataset(String),

    #[error("dataset validation failed for sequence {sequence}: {reason}")]
    Validation { sequence: String, reason: String },

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Stable machine-readable identifier, surfaced by the command-line tool.
    pub fn code(&self) -> &'static str {
        match self {
            Error::InvalidArgument(_) => "invalid_argument",
            Error::DegenerateRealSpectrum(_) => "degenerate_real_spectrum",
            Error::InvalidProbability { .. } => "invalid_probability",
            Error::MalformedDataset(_) => "malformed_dataset",
            Error::Validation { .. } => "validation_error",
            Error::Parse { .. } => "parse_error",
            Error::Io(_) => "io_error",
            Error::Csv(_) => "csv_error",
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}

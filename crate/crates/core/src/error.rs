use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid {field}: {reason}")]
    Invalid { field: String, reason: String },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("use-monte-carlo: {0}")]
    UseMonteCarlo(String),

    #[error("non-finite linear predictor at row {row}, column {column}")]
    NonFinitePredictor { row: usize, column: usize },

    #[error("correlation undefined for degenerate margin (p = {0})")]
    DegenerateMargin(f64),

    #[error("zero variance: {0}")]
    ZeroVariance(String),

    #[error("no complete cases")]
    NoCompleteCases,

    #[error("column {column}: {observed} observed values, at least {required} required")]
    TooFewObserved {
        column: usize,
        observed: usize,
        required: usize,
    },

    #[error("csv error at line {line}, column {column}: {reason}")]
    Csv {
        line: usize,
        column: String,
        reason: String,
    },

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Invalid {
            field: field.into(),
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

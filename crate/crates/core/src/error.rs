use thiserror::Error;

/// Library-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// A line of an input file could not be parsed.
    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },

    /// A record violated the data schema or one of its invariants.
    #[error("schema violation: {0}")]
    Schema(String),

    /// A timestamp fell outside the trading calendar.
    #[error("timestamp {0} is after the last calendar close")]
    AfterCalendar(i64),

    /// A design matrix is rank deficient.
    #[error("singular design matrix: column `{0}` is linearly dependent")]
    Singular(String),

    /// Not enough observations for the requested computation.
    #[error("insufficient observations: {0}")]
    Insufficient(String),

    /// A required value is undefined (price gap, empty window, ...).
    #[error("undefined value: {0}")]
    Undefined(String),

    /// Invalid argument or configuration.
    #[error("invalid input: {0}")]
    Invalid(String),

    /// Referenced data is missing.
    #[error("missing data: {0}")]
    MissingData(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

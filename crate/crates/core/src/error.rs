use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// Malformed instance, strategy file or number literal.
    #[error("parse error at line {line}, column {column} ({field}): {message}")]
    Parse {
        line: usize,
        column: usize,
        field: String,
        message: String,
    },

    #[error("shape error: {0}")]
    Shape(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    /// A requested exhaustive computation exceeds its configured cap.
    #[error("capacity exceeded: {what} needs {needed}, cap is {cap}; {hint}")]
    Capacity {
        what: String,
        needed: u128,
        cap: u128,
        hint: String,
    },

    #[error("ratio undefined: {0}")]
    UndefinedRatio(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("not a probability distribution: {0}")]
    NotADistribution(String),

    #[error("mechanism {mechanism} does not accept {expected} strategies")]
    StrategyKind {
        mechanism: String,
        expected: &'static str,
    },
}

impl Error {
    pub(crate) fn parse(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            line: 0,
            column: 0,
            field: field.into(),
            message: message.into(),
        }
    }
}

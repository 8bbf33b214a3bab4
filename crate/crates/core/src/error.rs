use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("parse error at {line}:{col}: {msg}")]
    Parse { line: usize, col: usize, msg: String },

    #[error("invalid input: {0}")]
    Input(String),

    #[error("letter {0:?} is not in the alphabet")]
    UnknownLetter(String),

    /// The word carries no almost-periodicity oracle.
    #[error("classification unavailable: {0}")]
    ClassificationUnavailable(String),

    #[error("precision budget exhausted: {0}")]
    Precision(String),

    #[error("bound exceeded budget: {0}")]
    Budget(String),

    #[error("certificate violation: {0}")]
    Certificate(String),

    #[error("unsupported relation structure: {0}")]
    UnsupportedRelation(String),

    #[error("degenerate factor region: {0}")]
    DegenerateRegion(String),

    #[error("ultimately periodic via other route: {0}")]
    NotGrowing(String),
}

impl Error {
    pub fn parse(line: usize, col: usize, msg: impl Into<String>) -> Self {
        Error::Parse { line, col, msg: msg.into() }
    }

    pub fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    /// Process exit code: 1 for input errors, 2 for precision or budget
    /// exhaustion, 3 for certificate violations.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Precision(_) | Error::Budget(_) => 2,
            Error::Certificate(_) => 3,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

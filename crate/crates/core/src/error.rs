use thiserror::Error;

use crate::cnf::Assignment;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("{what} is {value}, which exceeds the cap of {cap}")]
    CapExceeded {
        what: &'static str,
        value: u64,
        cap: u64,
    },

    #[error("assignment scope mismatch: {0}")]
    Scope(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("no clause is violated by the given assignment")]
    NoViolation,

    #[error("formula is satisfiable")]
    Satisfiable(Assignment),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("not a valid semantic refutation: {0}")]
    InvalidRefutation(String),

    #[error("circuit does not separate the accepting and rejecting instances: {0}")]
    NotSeparating(String),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            msg: msg.into(),
        }
    }

    pub(crate) fn cap(what: &'static str, value: impl TryInto<u64>, cap: impl TryInto<u64>) -> Self {
        Error::CapExceeded {
            what,
            value: value.try_into().unwrap_or(u64::MAX),
            cap: cap.try_into().unwrap_or(u64::MAX),
        }
    }
}

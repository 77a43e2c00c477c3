use thiserror::Error;

/// Errors surfaced by the library.
///
/// Verdicts such as "No" or "Unknown" are never errors; they are carried in
/// the return values of the deciders.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("structural error: {0}")]
    Structure(String),

    #[error("level {level} is past the last table of an explicit diagram (last level {last})")]
    LevelOutOfRange { level: usize, last: usize },

    #[error("capability limit: {0}")]
    Capability(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("obstruction at {stage} stage: {n} is in exactly one divisor set")]
    Obstruction { stage: String, n: u64 },

    #[error("search exhausted: {0}")]
    Exhausted(String),

    #[error("certificate rejected: {0}")]
    Certificate(String),
}

impl Error {
    /// True for errors caused by bounded capabilities rather than bad input.
    pub fn is_capability(&self) -> bool {
        matches!(
            self,
            Error::LevelOutOfRange { .. } | Error::Capability(_) | Error::Exhausted(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;

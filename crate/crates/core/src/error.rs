use thiserror::Error;

/// Errors raised by the library. The CLI maps each variant onto an exit code.
#[derive(Debug, Error)]
pub enum Error {
    /// An input violates an operation's precondition (bad parameter, wrong graph class, ...).
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// The request exceeds a configured resource limit (exact-oracle size, degree cap, ...).
    #[error("resource limit: {0}")]
    ResourceLimit(String),

    /// A graph could not be constructed from the given edges.
    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    /// Malformed edge-list text.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    /// A randomized estimate contradicts an exact fact (e.g. a zero level with a positive count).
    #[error("inconsistent estimate: {0}")]
    Inconsistent(String),

    #[error("random regular generation failed after {attempts} attempts")]
    GenerationFailed { attempts: usize },

    #[error("unknown {kind} '{name}', available: {available}")]
    UnknownStrategy {
        kind: &'static str,
        name: String,
        available: String,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn precondition(msg: impl Into<String>) -> Error {
    Error::Precondition(msg.into())
}

use thiserror::Error;

use crate::model::Vertex;

/// Errors raised while reading, building or validating problem data.
#[derive(Debug, Error)]
pub enum ModelError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid instance: {0}")]
    Invalid(String),

    #[error("unknown vertex id {0}")]
    UnknownId(u32),

    #[error("vertex index {0} is out of range")]
    UnknownVertex(Vertex),

    #[error("vertex {vertex} is not a {expected}")]
    WrongKind {
        vertex: Vertex,
        expected: &'static str,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl ModelError {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        ModelError::Parse {
            line,
            message: message.into(),
        }
    }
}

/// Errors raised by the search and pricing routines.
#[derive(Debug, Error)]
pub enum SolveError {
    #[error("construction failed: no feasible insertion for customer {customer} under either ordering")]
    Construction { customer: u32 },

    #[error("first-level fleet cannot carry the satellite demands")]
    FirstLevelCapacity,

    #[error("state space exceeds the configured cap of {cap} labels")]
    StateSpaceExceeded { cap: usize },

    #[error("ng neighbourhood size {0} is larger than the supported maximum of 64")]
    NgTooLarge(usize),

    #[error(transparent)]
    Model(#[from] ModelError),
}

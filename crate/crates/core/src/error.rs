use thiserror::Error;

use crate::schema::ValidationReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("duplicate object name {0}")]
    DuplicateObject(String),

    #[error("undeclared object {name} (referenced by {referrer})")]
    UndeclaredObject { name: String, referrer: String },

    #[error("invalid input graph: {0}")]
    InvalidGraph(ValidationReport),

    #[error("unknown object {0}")]
    UnknownObject(String),

    #[error("no arrow {from} -> {to} in graph")]
    UnknownArrow { from: String, to: String },

    #[error("{0}")]
    Precondition(String),

    #[error("chase exceeded row limit of {limit}")]
    ChaseLimit { limit: usize },

    #[error("universe of {size} attributes exceeds the bound of {limit}")]
    TooLarge { size: usize, limit: usize },

    #[error("lossless partitioning violated: arrow {arrow} is not contained in any partition")]
    Lossy { arrow: String },

    #[error("internal inconsistency: {0}")]
    Inconsistent(String),
}

//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("arity mismatch: SUT `{sut}` expects {expected} arguments, got {got}")]
    ArityMismatch {
        sut: String,
        expected: usize,
        got: usize,
    },

    #[error("input distance is zero: the two input points are identical")]
    ZeroInputDistance,

    #[error("output class `{0}` is not in the SUT's declared vocabulary")]
    UnknownClass(String),

    #[error("archive is empty")]
    EmptyArchive,

    #[error("parent inputs are identical; cannot mutate a degenerate pair")]
    DegenerateParent,

    #[error("need at least 2 candidates to derive search bounds, got {0}")]
    InsufficientCandidates(usize),

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("cell {0:?} is not present in the candidate universe")]
    UnknownCell(crate::descriptors::CellCoord),

    #[error("candidate universe has no feasible cells")]
    EmptyUniverse,

    #[error("no SUT named `{0}` is registered")]
    SutNotFound(String),

    #[error("plotting requires arity >= 2, SUT `{0}` has arity {1}")]
    ArityUnsupported(String, usize),

    #[error("invalid config: {0}")]
    InvalidConfig(String),

    #[error("{path}:{line}: schema error: {msg}")]
    Schema {
        path: String,
        line: usize,
        msg: String,
    },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

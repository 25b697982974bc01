use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{what} = {value} outside [{lo}, {hi}]")]
    Domain {
        what: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error("phase-space mismatch: expected {expected}, found {found}")]
    KindMismatch {
        expected: &'static str,
        found: &'static str,
    },

    #[error("position {position} is not covered by the materialized depth {depth}")]
    DepthExceeded { position: i128, depth: u32 },

    #[error("word length mismatch: {left} vs {right}")]
    WordLength { left: usize, right: usize },

    #[error("word length {len} must be odd")]
    WordParity { len: usize },

    #[error("malformed distance matrix: {0}")]
    MalformedMatrix(String),

    #[error("instance size {size} exceeds the exact-search limit {limit}")]
    SizeLimit { size: usize, limit: usize },

    #[error("horizon {horizon} exhausted: {detail}")]
    HorizonExhausted { horizon: usize, detail: String },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("bisection bracket failure for scale family {family}: {detail}")]
    BracketFailure { family: String, detail: String },

    #[error("degenerate input: {0}")]
    DegenerateInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is singular")]
    Singular,

    #[error("paper bit-width mode requires n >= 3 (got n = {n})")]
    UnsupportedMode { n: usize },

    #[error("index out of range: {0}")]
    IndexOutOfRange(String),

    #[error("exhaustive search refused: {n_vars} variables exceeds the cap of {cap}; use simulated annealing")]
    OverCap { n_vars: usize, cap: usize },

    #[error("oracle enumeration refused: {points} candidate points exceeds the cap of {cap}")]
    OracleCap { points: String, cap: u64 },

    /// `line` is 1-based; 0 when the error is not tied to a line.
    #[error("parse error{}: {msg}", at_line(*line))]
    Parse { line: usize, msg: String },

    #[error("invalid annealing schedule: {0}")]
    InvalidSchedule(String),

    #[error("invalid instance: {0}")]
    InvalidInstance(String),
}

pub type Result<T> = std::result::Result<T, Error>;

fn at_line(line: usize) -> String {
    if line == 0 {
        String::new()
    } else {
        format!(" at line {line}")
    }
}

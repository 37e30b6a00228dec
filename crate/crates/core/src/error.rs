use std::io;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unsupported Daubechies order {0}: expected 1..=10 vanishing moments")]
    UnsupportedOrder(usize),

    #[error("invalid filter: {0}")]
    FilterInvalid(String),

    #[error("shape error: {0}")]
    Shape(String),

    #[error("index {index} out of range for level {level} (must be < {bound})")]
    Index {
        level: usize,
        index: usize,
        bound: usize,
    },

    #[error("point {0} outside the unit interval [0, 1)")]
    Domain(f64),

    #[error("unknown test function `{0}` (expected parabolas, ramp or blip)")]
    Catalog(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("malformed input: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Integer log2 of `n` if it is a power of two.
pub(crate) fn log2_exact(n: usize) -> Result<usize> {
    if n == 0 || !n.is_power_of_two() {
        return Err(Error::Shape(format!("length {n} is not a power of two")));
    }
    Ok(n.trailing_zeros() as usize)
}

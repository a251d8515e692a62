use std::io;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid ensemble parameters: {0}")]
    InvalidParams(String),

    #[error("erasure probability {0} outside [0, 1]")]
    InvalidEpsilon(f64),

    #[error("window size {size} outside [1, {max}]")]
    WindowOutOfRange { size: usize, max: usize },

    #[error("density evolution indeterminate at epsilon = {0} (iteration cap reached)")]
    Indeterminate(f64),

    #[error("estimate unusable: {0}")]
    Unusable(String),

    #[error("epsilon {eps} outside the parameter grid [{lo}, {hi}]; extrapolation refused")]
    Extrapolation { eps: f64, lo: f64, hi: f64 },

    #[error("invalid argument: {0}")]
    Domain(String),

    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] io::Error),
}

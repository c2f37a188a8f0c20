use std::io;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("field has {actual} values, grid expects {expected}")]
    FieldLength { expected: usize, actual: usize },

    #[error("field value at index {index} is not finite")]
    NonFinite { index: usize },

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("invalid argument `{name}`: {reason}")]
    InvalidArgument { name: &'static str, reason: String },

    #[error("exponent p = {0} outside the open interval (3, 5)")]
    ExponentOutOfRange(f64),

    #[error("singular potential requires a staggered grid (a node sits at the origin)")]
    SingularOnUnstaggered,

    #[error("quadratic form A1 = {a1:e} is not positive; coercivity fails for this field")]
    NonCoercive { a1: f64 },

    #[error("field has zero L^(p+1) mass; cannot project onto the Nehari manifold")]
    ZeroField,

    #[error(
        "coercivity check failed (C_est = {estimate:e}); pass the override flag to run anyway"
    )]
    CoercivityGate { estimate: f64 },

    #[error("no descent after backtracking to step {step:e} at iteration {iteration}")]
    NoDescent { iteration: usize, step: f64 },

    #[error("direct double sum limited to n <= {max}, got n = {n}")]
    OracleTooLarge { n: usize, max: usize },

    #[error("malformed field dump: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

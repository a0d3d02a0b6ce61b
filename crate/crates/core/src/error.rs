use thiserror::Error;

/// Errors raised by the coherent-state library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("eta(x) = {eta:e} at x = {x} is below the degeneracy threshold")]
    DegenerateEta { x: f64, eta: f64 },

    #[error("invalid ladder: {0}")]
    InvalidLadder(String),

    #[error("coherent series diverges: coefficient ratio stayed >= 1 up to n = {n}")]
    Divergence { n: usize },

    #[error("weight f(n) does not satisfy the Heisenberg-Weyl recursion at n = {n}: f = {found}, expected {expected}")]
    NotHwAlgebra { n: usize, found: f64, expected: f64 },

    #[error("{quantity}: closed form {closed} disagrees with matrix-element oracle {oracle}")]
    OracleMismatch {
        quantity: &'static str,
        closed: f64,
        oracle: f64,
    },

    #[error("state {0} is not extremal (must be 0 or a root of f)")]
    NotExtremal(usize),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;

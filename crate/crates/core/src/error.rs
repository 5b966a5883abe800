use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("size {n} exceeds the configured cap {cap}")]
    Size { n: usize, cap: usize },

    #[error("pole: spectral parameter equals 1 ({0})")]
    Pole(String),

    #[error("index {index} out of range 1..={max}")]
    IndexOutOfRange { index: usize, max: usize },

    #[error("invalid spectral point: {0}")]
    InvalidPoint(String),

    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),

    #[error("invalid configuration: {0}")]
    InvalidConfiguration(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("quadrature did not converge: value {value:e}, last delta {delta:e} at {points} points")]
    Accuracy { value: f64, delta: f64, points: usize },

    #[error("quadrature budget exceeded: {0}")]
    Budget(String),

    #[error("degenerate evaluation point: {0}")]
    Degenerate(String),
}

pub type Result<T> = std::result::Result<T, Error>;

use thiserror::Error;

/// Errors produced by the numerical kernels and verification drivers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error in {func}: {detail}")]
    Domain { func: &'static str, detail: String },

    #[error("{func} did not converge: estimate {estimate:e}, last change {delta:e} after {levels} levels")]
    Convergence {
        func: &'static str,
        estimate: f64,
        delta: f64,
        levels: usize,
    },

    #[error("invalid parameters: {0}")]
    InvalidParameters(String),

    #[error("{0} is not supported for this map")]
    UnsupportedMap(&'static str),

    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("singular system: determinant {0:e}")]
    Singular(f64),

    #[error("near-zero denominator in {0}")]
    NearZeroDenominator(&'static str),

    #[error("inconsistent evaluation: {0}")]
    Inconsistent(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(func: &'static str, detail: impl Into<String>) -> Error {
    Error::Domain {
        func,
        detail: detail.into(),
    }
}

use thiserror::Error;

/// Errors raised by density construction and the information measures.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid support: {0}")]
    InvalidSupport(String),
    #[error("invalid density: {0}")]
    InvalidDensity(String),
    #[error("invalid pmf: {0}")]
    InvalidPmf(String),
    #[error("argument error: {0}")]
    Argument(String),
    #[error("operation requires a one-dimensional support")]
    UnsupportedDimension,
    #[error("integral did not converge after {subdivisions} subdivisions (estimate {estimate}, error {error})")]
    BudgetExceeded {
        estimate: f64,
        error: f64,
        subdivisions: usize,
    },
    #[error("integrand is not finite at x = {0}")]
    NonFinite(f64),
    #[error("numerator is not dominated by the reference: {0}")]
    Domination(String),
    #[error("alphabet mismatch: {0}")]
    AlphabetMismatch(String),
    #[error("configuration error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;

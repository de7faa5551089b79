use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("compatibility violation: Er_bar = {er_bar} but a*theta_bar^4 = {expected}")]
    CompatibilityViolation { er_bar: f64, expected: f64 },

    #[error("non-positive state: {0}")]
    NonPositiveState(String),

    #[error("equation of state violates its monotonicity or derivative contract: {0}")]
    EosViolation(String),

    #[error("eigensolver did not converge: {0}")]
    EigenFailure(String),

    #[error("kernel eigenpairs only exist without velocity damping (nu = {nu})")]
    DampingPresent { nu: f64 },

    #[error("no compensator with positive margin found (best margin {margin:e})")]
    NoCompensatorFound { margin: f64 },

    #[error("grid too small: n = {n} (need a power of two >= 4)")]
    GridTooSmall { n: usize },

    #[error("non-coercive relative functional: infimum ratio {infimum:e} on {domain}")]
    NonCoercive { domain: &'static str, infimum: f64 },

    #[error("config line {line}: {message}")]
    Config { line: usize, message: String },

    #[error("{0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

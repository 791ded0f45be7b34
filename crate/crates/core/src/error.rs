use thiserror::Error;

/// Errors raised by the numerical routines in this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    #[error("series did not converge within {terms} terms (tail estimate {tail:e})")]
    NonConvergent { terms: usize, tail: f64 },

    #[error("series argument x[{index}] = {value} lies outside the unit convergence region")]
    OutOfConvergenceRegion { index: usize, value: f64 },

    #[error("series dimension {n} exceeds the configured limit of {limit}")]
    DimensionTooLarge { n: usize, limit: usize },

    #[error("could not bracket p = {p} for the CDF inverse")]
    BracketFailure { p: f64 },

    #[error("quadrature did not reach tolerance {tol:e} (error estimate {estimate:e})")]
    QuadratureFailure { tol: f64, estimate: f64 },
}

impl Error {
    /// Short variant name, as printed by the command-line front end.
    pub fn name(&self) -> &'static str {
        match self {
            Error::InvalidParam(_) => "InvalidParam",
            Error::NonConvergent { .. } => "NonConvergent",
            Error::OutOfConvergenceRegion { .. } => "OutOfConvergenceRegion",
            Error::DimensionTooLarge { .. } => "DimensionTooLarge",
            Error::BracketFailure { .. } => "BracketFailure",
            Error::QuadratureFailure { .. } => "QuadratureFailure",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

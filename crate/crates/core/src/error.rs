use thiserror::Error;

/// Errors produced by the trading-cycle engine and its supporting numerics.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("quadrature did not converge (estimate {estimate:e}, error bound {error_bound:e})")]
    QuadratureFailure { estimate: f64, error_bound: f64 },

    /// The rational side of the cycle (almost) never fires, so the expected
    /// waiting time is unbounded.
    #[error("degenerate strategy: {0}")]
    DegenerateStrategy(String),

    #[error("no fixed point: {0}")]
    NoFixedPoint(String),

    #[error("no equilibrium: {0}")]
    NoEquilibrium(String),

    #[error("root finding failed: {0}")]
    RootFinding(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    /// Process exit code for this error class.
    ///
    /// 1 for validation errors, 2 for solver or quadrature failures, 3 for I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidParameter(_) | Error::Domain(_) => 1,
            Error::QuadratureFailure { .. }
            | Error::DegenerateStrategy(_)
            | Error::NoFixedPoint(_)
            | Error::NoEquilibrium(_)
            | Error::RootFinding(_) => 2,
            Error::Io(_) => 3,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

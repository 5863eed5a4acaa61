use thiserror::Error;

use crate::linalg::C64;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("{which} is not Hermitian (asymmetry {asymmetry:e})")]
    NotHermitian { which: &'static str, asymmetry: f64 },

    #[error("{which} is not positive definite")]
    NotPositiveDefinite { which: &'static str },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("{name} = {value} is out of range")]
    OutOfRange { name: &'static str, value: f64 },

    #[error("form is not coercive: observed delta {delta:e}")]
    NonCoercive { delta: f64 },

    #[error("spectrum leaves the sector: eigenvalue angle {angle} >= theta {theta}")]
    NotSectorial { angle: f64, theta: f64 },

    #[error("resolvent is singular at lambda = {lambda}")]
    SingularResolvent { lambda: C64 },

    #[error("quadrature did not converge: error estimate {estimate:e} > tol {tol:e}")]
    QuadratureNotConverged { estimate: f64, tol: f64 },

    #[error("operator is not exponentially stable: min Re eigenvalue {min_re:e}")]
    NotStable { min_re: f64 },

    #[error("snapshots do not share one Hilbert triple")]
    TripleMismatch,

    #[error("singular linear system at time step {step}")]
    SingularSystem { step: usize },

    #[error("fixed-point map is not contracting: estimated factor {factor}")]
    NotContracting { factor: f64 },

    #[error("maximum number of iterations ({iterations}) exceeded, last update {residual:e}")]
    MaxIterExceeded { iterations: usize, residual: f64 },

    #[error("Hölder exponent alpha = {alpha} must exceed 1/4")]
    InvalidHolder { alpha: f64 },

    #[error("manufactured solution vanishes at the endpoint x = {endpoint}")]
    BoundaryZero { endpoint: f64 },

    #[error("fixed-point iteration did not converge after {iterations} iterations (residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    /// Failures that are mathematical outcomes rather than misuse of the API.
    pub fn is_mathematical(&self) -> bool {
        matches!(
            self,
            Error::NonCoercive { .. }
                | Error::NotContracting { .. }
                | Error::NotConverged { .. }
                | Error::NotStable { .. }
                | Error::NotSectorial { .. }
                | Error::QuadratureNotConverged { .. }
                | Error::MaxIterExceeded { .. }
        )
    }
}

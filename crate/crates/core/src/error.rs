use thiserror::Error;

/// Failure conditions shared by every numerical routine in the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A Cauchy-kernel integral was evaluated on top of a jump or endpoint of its input.
    #[error("singular point at t = {t}")]
    SingularPoint { t: f64 },

    /// A non-oscillatory unbounded piece makes the principal value diverge logarithmically.
    #[error("divergent principal value: {0}")]
    Divergent(String),

    #[error("quadrature did not converge: spread {spread:.3e} exceeds tolerance {tolerance:.3e}")]
    NonConvergence { spread: f64, tolerance: f64 },

    #[error("domain error: {0}")]
    Domain(String),
}

pub type Result<T> = std::result::Result<T, Error>;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("domain error: {0}")]
    Domain(String),

    /// `p = 1` with `A = inf`: the supremum `B` of the operator norm is not attained.
    #[error("no extremal weight exists for p = 1 and A = inf; the supremum {unattained} (= B) is not attained")]
    NoExtremal { unattained: f64 },

    #[error("divergent integral: {0}")]
    Divergent(String),

    #[error("contract violation: {0}")]
    ContractViolation(String),

    #[error(
        "basis of size {basis} leaks {leak:.3e} of its phase-space mass outside the truncation box; \
         use half_width >= {suggested_half_width:.3}"
    )]
    TailLeak {
        basis: usize,
        leak: f64,
        suggested_half_width: f64,
    },

    #[error("matrix is not Hermitian (max asymmetry {asymmetry:.3e})")]
    NotHermitian { asymmetry: f64 },

    #[error("frequency {max_frequency} exceeds the Nyquist limit {nyquist} of the time sampling")]
    Aliasing { max_frequency: f64, nyquist: f64 },

    #[error("eigenvalue normalization self-check failed: got {got}, expected {expected}")]
    Normalization { got: f64, expected: f64 },

    #[error("root finder did not converge: {0}")]
    NoConvergence(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

use thiserror::Error;

/// Errors produced by the spin-chain engine.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{n_sites} sites exceeds the dense cap of {cap}; use the matrix-free action instead")]
    TooLargeForDense { n_sites: usize, cap: usize },

    #[error("dimension mismatch: expected {expected} sites, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("site {site} is outside 1..={n_sites}")]
    SiteOutOfRange { site: usize, n_sites: usize },

    #[error("coefficient must be finite and nonzero, got {0}")]
    InvalidCoefficient(f64),

    #[error("need at least {min} sites, got {n_sites}")]
    TooFewSites { n_sites: usize, min: usize },

    #[error("{what}: expected length {expected}, found {found}")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },

    #[error(
        "Krylov propagation did not converge at t = {time}: error estimate {estimate:e} \
         with step {step:e} after {halvings} halvings"
    )]
    Convergence {
        time: f64,
        step: f64,
        estimate: f64,
        halvings: usize,
    },

    #[error("invalid `{name}`: {reason}")]
    InvalidParameter { name: String, reason: String },

    #[error("cannot parse {what} from {input:?}: {reason}")]
    Parse {
        what: &'static str,
        input: String,
        reason: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn invalid(name: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name: name.into(),
            reason: reason.into(),
        }
    }
}

impl Error {
    /// True for errors caused by bad input rather than by a failed computation.
    pub fn is_usage(&self) -> bool {
        !matches!(self, Error::Convergence { .. })
    }
}

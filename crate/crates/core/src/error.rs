use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {what} = {value}")]
    Domain { what: &'static str, value: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("series did not converge: {what} (order {order}, tail {tail:e})")]
    NonConvergence {
        what: &'static str,
        order: usize,
        tail: f64,
    },

    #[error("non-positive density {density:e} at cosine t = {t}")]
    NonPositiveDensity { t: f64, density: f64 },

    #[error("Fisher information not positive semidefinite (min eigenvalue {min_eigenvalue:e}, trace {trace:e}); increase mc_samples")]
    NotPositiveSemidefinite { min_eigenvalue: f64, trace: f64 },
}

impl Error {
    pub(crate) fn domain(what: &'static str, value: impl Into<f64>) -> Self {
        Error::Domain {
            what,
            value: value.into(),
        }
    }

    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}

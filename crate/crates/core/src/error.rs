use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("domain violation: {0}")]
    Domain(String),

    #[error("pole: {0}")]
    Pole(String),

    #[error("derivative order {requested} exceeds the available order {available}")]
    DerivativeOrder { requested: usize, available: usize },

    #[error("quadrature did not converge: {what} (error estimate {err_est:e})")]
    Quadrature { what: String, err_est: f64 },

    #[error("profile check failed: {0}")]
    Profile(String),

    #[error("grid: {0}")]
    Grid(String),
}

impl Error {
    /// True for errors caused by the caller's configuration rather than
    /// by a numerical failure.
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            Error::InvalidParameter(_) | Error::DerivativeOrder { .. } | Error::Grid(_)
        )
    }
}

use thiserror::Error;

use crate::model::ValidationReport;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("invalid problem: {0}")]
    Invalid(ValidationReport),

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("singular matrix (|det| = {det:e})")]
    Singular { det: f64 },

    #[error("matrix is not Hermitian positive definite")]
    NotPositiveDefinite,

    #[error("negative discriminant {disc:e} in eigenvalue computation")]
    NegativeDiscriminant { disc: f64 },

    #[error("negative radicand {value:e} while computing `{param}`")]
    NegativeRadicand { param: &'static str, value: f64 },

    #[error("{what} did not converge within {terms} terms")]
    NonConvergence { what: &'static str, terms: usize },

    #[error("{what} overflows double precision at x = {x}")]
    Overflow { what: &'static str, x: f64 },

    #[error("quadrature did not reach tolerance {tol:e} (achieved {achieved:e})")]
    Quadrature { tol: f64, achieved: f64 },

    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl Error {
    /// True for errors caused by the problem statement rather than the numerics.
    pub fn is_validation(&self) -> bool {
        matches!(self, Error::Invalid(_) | Error::Argument(_))
    }
}

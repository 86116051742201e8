//! Error probability `Pr{D<0}` for decision variables that are sums of
//! indefinite Hermitian quadratic forms in complex Gaussian vectors.
//!
//! The closed forms live in [`closed_form`]; [`oracles`] provides two
//! independent checks (numerical inversion of the characteristic function
//! and Monte Carlo simulation).

pub mod charfun;
pub mod closed_form;
pub mod error;
pub mod linalg2;
pub mod model;
pub mod oracles;
pub mod quadrature;
pub mod random;
pub mod selftest;
pub mod specfun;

pub use error::{Error, Result};
pub use linalg2::{CVec2, Complex2x2, EigenPair};
pub use model::{MuParams, ProblemSpec, ValidationIssue, ValidationReport};
pub use num_complex::Complex64;

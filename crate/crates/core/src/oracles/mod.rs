//! Independent estimates of `Pr{D<0}`.
//!
//! [`inversion`] inverts the characteristic function numerically and
//! [`montecarlo`] simulates the decision variable directly; [`histogram`] bins
//! the simulated samples.

pub mod histogram;
pub mod inversion;
pub mod montecarlo;

pub use histogram::{histogram_d, Histogram, HistogramRange};
pub use inversion::{invert_cf, invert_prepared, Inversion, DEFAULT_QUAD_TOL};
pub use montecarlo::{estimate_probability, sample_d, McConfig, McEstimate, Sampler};

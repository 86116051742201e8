//! Gil-Pelaez inversion at zero:
//! `Pr{D<0} = 1/2 - (1/pi) int_0^inf Im[phi_D(u)] / u du`.

use std::f64::consts::PI;

use crate::charfun::{cf_d, Prepared};
use crate::error::Result;
use crate::model::ProblemSpec;
use crate::quadrature;

pub const DEFAULT_QUAD_TOL: f64 = 1e-10;

/// Integration stops where the integrand envelope falls below this fraction
/// of the requested tolerance.
const ENVELOPE_FRACTION: f64 = 1e-12;

const MAX_INTERVALS: usize = 20_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Inversion {
    pub probability: f64,
    /// Quadrature error estimate plus the analytic tail bound, both divided by pi.
    pub abs_error: f64,
    /// Upper integration limit.
    pub cutoff: f64,
    pub evaluations: usize,
}

pub fn invert_cf(spec: &ProblemSpec, quad_tol: f64) -> Result<Inversion> {
    invert_prepared(&Prepared::new(spec)?, quad_tol)
}

pub fn invert_prepared(p: &Prepared, quad_tol: f64) -> Result<Inversion> {
    let e = p.eigen();
    let l = p.branches().len() as i32;
    let scale = e.delta1.max(-e.delta2);
    let mean = p.mean();
    let tiny = 1e-8 / scale;

    let integrand = |u: f64| {
        if u < tiny {
            // Im phi(u) / u -> E{D}
            mean
        } else {
            cf_d(p, u).im / u
        }
    };

    // |phi_D(u)| <= (u^2 d1 |d2|)^-L, so the integrand is below
    // g(u) = (d1 |d2|)^-L u^-(2L+1) and the tail past U is g(U) U / (2L).
    let prod = (e.delta1 * -e.delta2).powi(-l);
    let cutoff = (prod / (ENVELOPE_FRACTION * quad_tol)).powf(1.0 / (2 * l + 1) as f64);
    let start = 1.0 / scale;
    let cutoff = cutoff.max(4.0 * start);
    let tail = prod * cutoff.powi(-2 * l) / (2 * l) as f64;

    let mut panels = vec![(0.0, start)];
    let mut lo = start;
    while lo < cutoff {
        let hi = (2.0 * lo).min(cutoff);
        panels.push((lo, hi));
        lo = hi;
    }
    let r = quadrature::integrate(integrand, &panels, quad_tol * PI, MAX_INTERVALS)?;
    Ok(Inversion {
        probability: 0.5 - r.value / PI,
        abs_error: (r.abs_error + tail) / PI,
        cutoff,
        evaluations: r.evaluations,
    })
}

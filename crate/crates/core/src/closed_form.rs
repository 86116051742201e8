//! Closed-form `Pr{D<0}`.
//!
//! Two parameterizations feed the same series. The eigenvalue form works from
//! `d1 > 0 > d2`, the eigenvalues of `RQ`, and the scalars
//! `sum_k m_k^H [Q - d_i R^-1] m_k`. The legacy form works from the scalars
//! `w, v1, v2, alpha1_k, alpha2_k` and comes in two variants: the historical
//! expressions ([`Variant::AsPublished`], wrong whenever `C` is complex) and
//! the repaired ones ([`Variant::Corrected`]).
//!
//! With ratio `r = v2/v1 = |d1/d2|`, `N = 2L - 1`, `E = exp(-(a^2+b^2)/2)`:
//!
//! ```text
//! P = Q1(a,b) - I0(ab) E + I0(ab) E / (1+r)^N sum_{k<L} C(N,k) r^k
//!   + E / (1+r)^N sum_{n=1}^{L-1} In(ab) sum_{k=0}^{L-1-n} C(N,k) [(b/a)^n r^k - (a/b)^n r^(N-k)]
//! ```
//!
//! The weights `C(N,k) r^k / (1+r)^N` are evaluated as binomial probabilities
//! with success rate `r/(1+r)`, which never overflow.

use std::fmt;

use num_complex::Complex64;

use crate::charfun::Prepared;
use crate::error::{Error, Result};
use crate::model::{mu_from_r, ProblemSpec};
use crate::specfun::{bessel_i_scaled_sequence, marcum_q1, Accuracy};

/// Radicands in `[-RADICAND_TOL * scale, 0)` are treated as zero.
pub const RADICAND_TOL: f64 = 1e-12;

/// Largest `L` for which binomial coefficients are formed exactly in integers.
pub const EXACT_BINOMIAL_MAX_L: usize = 20;

/// Results outside `[0, 1]` by more than this are reported as numerical failures.
const RANGE_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variant {
    /// The historical expressions, with `C` and `C*` swapped in `w` and `alpha2_k`.
    AsPublished,
    Corrected,
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::AsPublished => "as-published",
            Variant::Corrected => "corrected",
        })
    }
}

/// Legacy scalar parameters of one problem.
#[derive(Debug, Clone, PartialEq)]
pub struct LegacyParams {
    pub variant: Variant,
    pub w: f64,
    pub v1: f64,
    pub v2: f64,
    pub alpha1: Vec<f64>,
    pub alpha2: Vec<f64>,
    pub a: f64,
    pub b: f64,
}

impl LegacyParams {
    pub fn branches(&self) -> usize {
        self.alpha1.len()
    }

    pub fn alpha1_total(&self) -> f64 {
        self.alpha1.iter().sum()
    }

    pub fn alpha2_total(&self) -> f64 {
        self.alpha2.iter().sum()
    }
}

/// Eigenvalue-based parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenParams {
    pub delta1: f64,
    pub delta2: f64,
    pub a: f64,
    pub b: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityReport {
    pub p_corrected: f64,
    /// `None` when the historical parameters break down (negative radicand).
    pub p_as_published: Option<f64>,
    pub a: f64,
    pub b: f64,
    pub delta1: f64,
    pub delta2: f64,
    pub method_notes: String,
}

fn clamp_radicand(param: &'static str, value: f64, scale: f64) -> Result<f64> {
    if value >= 0.0 {
        Ok(value)
    } else if value >= -RADICAND_TOL * scale.max(1.0) {
        Ok(0.0)
    } else {
        Err(Error::NegativeRadicand { param, value })
    }
}

pub fn legacy_params(spec: &ProblemSpec, variant: Variant) -> Result<LegacyParams> {
    spec.require_valid()?;
    let mu = mu_from_r(spec.r())?;
    let (a, b, c) = (spec.a(), spec.b(), spec.c());
    let indef = spec.indefiniteness();
    let denom = 4.0 * mu.det() * indef;

    let cross = match variant {
        Variant::AsPublished => c * mu.mu_xy.conj() + c.conj() * mu.mu_xy,
        Variant::Corrected => c.conj() * mu.mu_xy.conj() + c * mu.mu_xy,
    };
    let w = (a * mu.mu_xx + b * mu.mu_yy + cross.re) / denom;
    let root = (w * w + 1.0 / denom).sqrt();
    let v1 = root - w;
    let v2 = root + w;

    let mut alpha1 = Vec::with_capacity(spec.branches());
    let mut alpha2 = Vec::with_capacity(spec.branches());
    for m in spec.means() {
        let (x, y) = (m[0], m[1]);
        let t = x.norm_sqr() * mu.mu_yy + y.norm_sqr() * mu.mu_xx
            - x.conj() * y * mu.mu_xy
            - x * y.conj() * mu.mu_xy.conj();
        alpha1.push(2.0 * indef * t.re);
        let cross: Complex64 = match variant {
            Variant::AsPublished => c * x.conj() * y + c.conj() * x * y.conj(),
            Variant::Corrected => c.conj() * x.conj() * y + c * x * y.conj(),
        };
        alpha2.push(a * x.norm_sqr() + b * y.norm_sqr() + cross.re);
    }
    let s1: f64 = alpha1.iter().sum();
    let s2: f64 = alpha2.iter().sum();
    let sum_sq = (v1 + v2).powi(2);
    let scale_a = 2.0 * v1 * v1 * v2 * (s1 * v2).abs().max(s2.abs()) / sum_sq;
    let scale_b = 2.0 * v1 * v2 * v2 * (s1 * v1).abs().max(s2.abs()) / sum_sq;
    let rad_a = 2.0 * v1 * v1 * v2 * (s1 * v2 - s2) / sum_sq;
    let rad_b = 2.0 * v1 * v2 * v2 * (s1 * v1 + s2) / sum_sq;
    let a_par = clamp_radicand("a", rad_a, scale_a)?.sqrt();
    let b_par = clamp_radicand("b", rad_b, scale_b)?.sqrt();

    Ok(LegacyParams {
        variant,
        w,
        v1,
        v2,
        alpha1,
        alpha2,
        a: a_par,
        b: b_par,
    })
}

pub fn eigen_params(p: &Prepared) -> Result<EigenParams> {
    let e = p.eigen();
    let (mut s1, mut s2, mut scale1, mut scale2) = (0.0, 0.0, 0.0, 0.0);
    for br in p.branches() {
        s1 += br.mean_energy_q - e.delta1 * br.mean_energy_rinv;
        s2 += br.mean_energy_q - e.delta2 * br.mean_energy_rinv;
        scale1 += br.mean_energy_q.abs() + (e.delta1 * br.mean_energy_rinv).abs();
        scale2 += br.mean_energy_q.abs() + (e.delta2 * br.mean_energy_rinv).abs();
    }
    let gap = (e.delta1 - e.delta2).powi(2);
    let rad_a = 2.0 * e.delta2 * s1 / gap;
    let rad_b = 2.0 * e.delta1 * s2 / gap;
    let a = clamp_radicand("a", rad_a, 2.0 * e.delta2.abs() * scale1 / gap)?.sqrt();
    let b = clamp_radicand("b", rad_b, 2.0 * e.delta1 * scale2 / gap)?.sqrt();
    Ok(EigenParams {
        delta1: e.delta1,
        delta2: e.delta2,
        a,
        b,
    })
}

/// `C(n, k)`; exact integer arithmetic for `n <= 2 * EXACT_BINOMIAL_MAX_L - 1`,
/// log-gamma above.
pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    if n < 2 * EXACT_BINOMIAL_MAX_L {
        let k = k.min(n - k);
        let mut c: u64 = 1;
        for i in 0..k {
            c = c * (n - i) as u64 / (i + 1) as u64;
        }
        c as f64
    } else {
        ln_binomial(n, k).exp()
    }
}

fn ln_binomial(n: usize, k: usize) -> f64 {
    libm::lgamma(n as f64 + 1.0) - libm::lgamma(k as f64 + 1.0) - libm::lgamma((n - k) as f64 + 1.0)
}

/// `C(N,k) q^k (1-q)^(N-k)` for `k = 0..=N`, with `q = r/(1+r)`.
fn binomial_weights(n: usize, ratio: f64) -> Vec<f64> {
    let q = ratio / (1.0 + ratio);
    let p = 1.0 / (1.0 + ratio);
    if n < 2 * EXACT_BINOMIAL_MAX_L {
        (0..=n)
            .map(|k| binomial(n, k) * q.powi(k as i32) * p.powi((n - k) as i32))
            .collect()
    } else {
        let (lq, lp) = (q.ln(), p.ln());
        (0..=n)
            .map(|k| (ln_binomial(n, k) + k as f64 * lq + (n - k) as f64 * lp).exp())
            .collect()
    }
}

/// `E (num/den)^n I_n(ab)` where `num`, `den` are `a`, `b` in either order.
/// Finite as `den -> 0`: the limit is `E (num^2/2)^n / n!`.
fn weighted_bessel(n: usize, num: f64, den: f64, scaled_i: &[f64]) -> f64 {
    if num == 0.0 {
        return 0.0;
    }
    let x = num * den;
    if x < 1.0 {
        // (num/den)^n I_n(num den) = (num^2/2)^n sum_k (x/2)^{2k} / (k! (k+n)!)
        let lead = -0.5 * (num * num + den * den) + n as f64 * (0.5 * num * num).ln()
            - libm::lgamma(n as f64 + 1.0);
        let q = 0.25 * x * x;
        let (mut term, mut sum) = (1.0, 1.0);
        let mut k = 0.0;
        while term > f64::EPSILON * 0.25 * sum {
            k += 1.0;
            term *= q / (k * (k + n as f64));
            sum += term;
        }
        lead.exp() * sum
    } else {
        (-0.5 * (num - den).powi(2) + n as f64 * (num / den).ln()).exp() * scaled_i[n]
    }
}

/// General-`L` series in terms of `a`, `b` and `r = |d1/d2| = v2/v1`, with an
/// injectable `Q1` implementation.
pub(crate) fn series_with<F>(a: f64, b: f64, ratio: f64, l: usize, q1: F) -> Result<f64>
where
    F: Fn(f64, f64) -> Result<f64>,
{
    if l == 0 {
        return Err(Error::Argument("at least one branch is required".into()));
    }
    let n_total = 2 * l - 1;
    let pmf = binomial_weights(n_total, ratio);
    // lower[j] = sum_{k<=j} pmf[k], upper[j] = sum_{k<=j} pmf[N-k]
    let mut lower = Vec::with_capacity(l);
    let mut upper = Vec::with_capacity(l);
    let (mut lo, mut hi) = (0.0, 0.0);
    for j in 0..l {
        lo += pmf[j];
        hi += pmf[n_total - j];
        lower.push(lo);
        upper.push(hi);
    }
    let scaled_i = bessel_i_scaled_sequence(l - 1, a * b)?;
    let e_i0 = (-0.5 * (a - b).powi(2)).exp() * scaled_i[0];

    let mut p = q1(a, b)? - e_i0 * upper[l - 1];
    for n in 1..l {
        let tb = weighted_bessel(n, b, a, &scaled_i);
        let ta = weighted_bessel(n, a, b, &scaled_i);
        p += tb * lower[l - 1 - n] - ta * upper[l - 1 - n];
    }
    check_range(p)
}

fn check_range(p: f64) -> Result<f64> {
    if !(-RANGE_SLACK..=1.0 + RANGE_SLACK).contains(&p) {
        return Err(Error::Numerical(format!("probability {p} outside [0, 1]")));
    }
    Ok(p.clamp(0.0, 1.0))
}

/// The general-`L` series with the crate's Marcum Q.
pub fn series_probability(a: f64, b: f64, ratio: f64, l: usize, acc: &Accuracy) -> Result<f64> {
    series_with(a, b, ratio, l, |a, b| crate::specfun::marcum_q1_with(a, b, acc))
}

/// `L = 1` row, eigenvalue form: `Q1(a,b) + d1/(d2-d1) I0(ab) E`.
pub fn single_branch_eigen(e: &EigenParams) -> Result<f64> {
    let (a, b) = (e.a, e.b);
    let e_i0 = (-0.5 * (a - b).powi(2)).exp() * crate::specfun::bessel_i_scaled(0, a * b)?;
    check_range(marcum_q1(a, b)? + e.delta1 / (e.delta2 - e.delta1) * e_i0)
}

/// `L = 1` row, legacy form: `Q1(a,b) - (v2/v1)/(1 + v2/v1) I0(ab) E`.
pub fn single_branch_legacy(lp: &LegacyParams) -> Result<f64> {
    let (a, b) = (lp.a, lp.b);
    let r = lp.v2 / lp.v1;
    let e_i0 = (-0.5 * (a - b).powi(2)).exp() * crate::specfun::bessel_i_scaled(0, a * b)?;
    check_range(marcum_q1(a, b)? - r / (1.0 + r) * e_i0)
}

/// `Pr{D<0}` from a legacy parameter set.
pub fn probability_from_legacy(lp: &LegacyParams) -> Result<f64> {
    if lp.branches() == 1 {
        single_branch_legacy(lp)
    } else {
        series_probability(lp.a, lp.b, lp.v2 / lp.v1, lp.branches(), &Accuracy::default())
    }
}

pub fn probability_legacy(spec: &ProblemSpec, variant: Variant) -> Result<f64> {
    probability_from_legacy(&legacy_params(spec, variant)?)
}

/// Corrected `Pr{D<0}` from the eigenvalue form only.
pub fn probability_corrected(p: &Prepared) -> Result<(EigenParams, f64)> {
    let e = eigen_params(p)?;
    let l = p.branches().len();
    let prob = if l == 1 {
        single_branch_eigen(&e)?
    } else {
        series_probability(e.a, e.b, e.delta1 / -e.delta2, l, &Accuracy::default())?
    };
    Ok((e, prob))
}

pub fn probability(spec: &ProblemSpec) -> Result<ProbabilityReport> {
    let prepared = Prepared::new(spec)?;
    let (e, p_corrected) = probability_corrected(&prepared)?;
    let l = spec.branches();
    let mut notes = if l == 1 {
        "eigenvalue form, single-branch row".to_string()
    } else {
        format!("eigenvalue form, general series with L = {l}")
    };
    let p_as_published = match probability_legacy(spec, Variant::AsPublished) {
        Ok(p) => Some(p),
        Err(err) => {
            notes.push_str(&format!("; as-published parameters unusable: {err}"));
            None
        }
    };
    Ok(ProbabilityReport {
        p_corrected,
        p_as_published,
        a: e.a,
        b: e.b,
        delta1: e.delta1,
        delta2: e.delta2,
        method_notes: notes,
    })
}

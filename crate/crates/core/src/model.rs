//! The statistical model: `D = sum_k z_k^H Q z_k` with independent complex
//! Gaussian branches `z_k ~ CN(m_k, R)` sharing one covariance.

use std::f64::consts::FRAC_PI_4;
use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg2::{CVec2, Complex2x2, HERMITIAN_TOL};

/// Largest imaginary part accepted when `A` or `B` is given as a complex number.
pub const REAL_PART_TOL: f64 = 1e-12;

/// Decision-variable problem: the Hermitian form `[[A, C*], [C, B]]`, one mean
/// per branch, and the common covariance `R`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    a: f64,
    b: f64,
    c: Complex64,
    r: Complex2x2,
    means: Vec<CVec2>,
}

impl ProblemSpec {
    /// Builds the problem without validating it; see [`ProblemSpec::validate`].
    pub fn new(a: f64, b: f64, c: Complex64, r: Complex2x2, means: Vec<CVec2>) -> Self {
        Self { a, b, c, r, means }
    }

    /// Like [`ProblemSpec::new`] but takes `A` and `B` as complex numbers and
    /// rejects non-negligible imaginary parts.
    pub fn from_complex_ab(
        a: Complex64,
        b: Complex64,
        c: Complex64,
        r: Complex2x2,
        means: Vec<CVec2>,
    ) -> Result<Self> {
        for (name, v) in [("A", a), ("B", b)] {
            if v.im.abs() > REAL_PART_TOL * v.re.abs().max(1.0) {
                return Err(Error::Argument(format!(
                    "{name} must be real, got imaginary part {}",
                    v.im
                )));
            }
        }
        Ok(Self::new(a.re, b.re, c, r, means))
    }

    /// Builds the covariance from the half-covariance parameterization.
    pub fn with_mu(a: f64, b: f64, c: Complex64, mu: MuParams, means: Vec<CVec2>) -> Result<Self> {
        Ok(Self::new(a, b, c, r_from_mu(&mu)?, means))
    }

    /// `D = 2 Re{e^{j pi/4} X Y*}` with `X ~ CN(e^{j pi/4}, 1)`, `Y ~ CN(1, 1)`
    /// independent. The exact answer is `Pr{D<0} = 1/2`.
    pub fn rotated_product_example() -> Self {
        let rot = Complex64::from_polar(1.0, FRAC_PI_4);
        Self::new(
            0.0,
            0.0,
            rot,
            Complex2x2::identity(),
            vec![[rot, Complex64::new(1.0, 0.0)]],
        )
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn c(&self) -> Complex64 {
        self.c
    }

    pub fn r(&self) -> &Complex2x2 {
        &self.r
    }

    pub fn q(&self) -> Complex2x2 {
        build_q(self.a, self.b, self.c)
    }

    pub fn means(&self) -> &[CVec2] {
        &self.means
    }

    /// Number of branches `L`.
    pub fn branches(&self) -> usize {
        self.means.len()
    }

    /// `|C|^2 - AB`; positive exactly when `Q` is indefinite.
    pub fn indefiniteness(&self) -> f64 {
        self.c.norm_sqr() - self.a * self.b
    }

    /// Same problem with `Q` scaled by `s`.
    pub fn with_q_scaled(&self, s: f64) -> Self {
        Self::new(self.a * s, self.b * s, self.c * s, self.r, self.means.clone())
    }

    /// Same problem with a different set of branch means.
    pub fn with_means(&self, means: Vec<CVec2>) -> Self {
        Self::new(self.a, self.b, self.c, self.r, means)
    }

    pub fn validate(&self) -> ValidationReport {
        let mut issues = Vec::new();
        let finite = [self.a, self.b, self.c.re, self.c.im].iter().all(|v| v.is_finite())
            && self.r.rows().iter().flatten().all(|z| z.is_finite())
            && self.means.iter().flatten().all(|z| z.is_finite());
        if !finite {
            issues.push(ValidationIssue::NonFinite);
        }
        if self.means.is_empty() {
            issues.push(ValidationIssue::NoBranches);
        }
        if !self.q().is_indefinite() {
            issues.push(ValidationIssue::QNotIndefinite {
                trivial_probability: self.trivial_probability(),
            });
        }
        if !self.r.is_hermitian() {
            issues.push(ValidationIssue::RNotHermitian);
        } else if !self.r.is_positive_definite() {
            issues.push(ValidationIssue::RNotPositiveDefinite);
        }
        ValidationReport { issues }
    }

    /// `Pr{D<0}` when `Q` is semidefinite and the answer does not depend on
    /// the means: 0 for `Q >= 0`, 1 for nonzero `Q <= 0`. `None` if `Q` is
    /// indefinite.
    pub fn trivial_probability(&self) -> Option<f64> {
        let q = self.q();
        if q.is_indefinite() {
            return None;
        }
        let scale = q.max_abs();
        if scale == 0.0 {
            // D = 0 identically.
            return Some(0.0);
        }
        if self.a + self.b >= 0.0 {
            Some(0.0)
        } else {
            Some(1.0)
        }
    }

    pub(crate) fn require_valid(&self) -> Result<()> {
        let report = self.validate();
        if report.is_valid() {
            Ok(())
        } else {
            Err(Error::Invalid(report))
        }
    }
}

/// `[[A, C*], [C, B]]`.
pub fn build_q(a: f64, b: f64, c: Complex64) -> Complex2x2 {
    Complex2x2::hermitian_from(a, b, c)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ValidationIssue {
    NonFinite,
    NoBranches,
    /// `|C|^2 - AB <= 0`.
    QNotIndefinite { trivial_probability: Option<f64> },
    RNotHermitian,
    RNotPositiveDefinite,
}

impl fmt::Display for ValidationIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ValidationIssue::NonFinite => write!(f, "non-finite input value"),
            ValidationIssue::NoBranches => write!(f, "at least one branch mean is required"),
            ValidationIssue::QNotIndefinite {
                trivial_probability,
            } => {
                write!(f, "Q not indefinite: Pr{{D<0}} is trivially 0 or 1")?;
                if let Some(p) = trivial_probability {
                    write!(f, " (here {p})")?;
                }
                Ok(())
            }
            ValidationIssue::RNotHermitian => write!(f, "R not Hermitian"),
            ValidationIssue::RNotPositiveDefinite => write!(f, "R not positive definite"),
        }
    }
}

/// Outcome of [`ProblemSpec::validate`]; empty means valid.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub issues: Vec<ValidationIssue>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.issues.is_empty()
    }

    pub fn has(&self, pred: impl Fn(&ValidationIssue) -> bool) -> bool {
        self.issues.iter().any(pred)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.issues.is_empty() {
            return write!(f, "valid");
        }
        for (i, issue) in self.issues.iter().enumerate() {
            if i > 0 {
                write!(f, "; ")?;
            }
            write!(f, "{issue}")?;
        }
        Ok(())
    }
}

/// Half-covariance parameters: `R = 2 [[mu_xx, mu_xy], [mu_xy*, mu_yy]]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MuParams {
    pub mu_xx: f64,
    pub mu_yy: f64,
    pub mu_xy: Complex64,
}

impl MuParams {
    /// `mu_xx mu_yy - |mu_xy|^2`.
    pub fn det(&self) -> f64 {
        self.mu_xx * self.mu_yy - self.mu_xy.norm_sqr()
    }
}

pub fn mu_from_r(r: &Complex2x2) -> Result<MuParams> {
    if !r.is_positive_definite() {
        return Err(Error::NotPositiveDefinite);
    }
    Ok(MuParams {
        mu_xx: r.get(0, 0).re / 2.0,
        mu_yy: r.get(1, 1).re / 2.0,
        mu_xy: r.get(0, 1) / 2.0,
    })
}

pub fn r_from_mu(mu: &MuParams) -> Result<Complex2x2> {
    let tol = HERMITIAN_TOL * mu.mu_xx.abs().max(mu.mu_yy.abs()).max(mu.mu_xy.norm()).powi(2);
    if !(mu.mu_xx > 0.0 && mu.mu_yy > 0.0 && mu.det() > tol) {
        return Err(Error::NotPositiveDefinite);
    }
    Ok(Complex2x2::new(
        (2.0 * mu.mu_xx).into(),
        mu.mu_xy * 2.0,
        mu.mu_xy.conj() * 2.0,
        (2.0 * mu.mu_yy).into(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn example_is_valid() {
        let spec = ProblemSpec::rotated_product_example();
        assert!(spec.validate().is_valid());
        assert!((spec.indefiniteness() - 1.0).abs() < 1e-15);
        assert_eq!(spec.branches(), 1);
    }

    #[test]
    fn definite_q_is_flagged_with_its_trivial_value() {
        let spec = ProblemSpec::new(1.0, 1.0, c(0.0, 0.0), Complex2x2::identity(), vec![[c(1.0, 0.0); 2]]);
        let report = spec.validate();
        assert!(!report.is_valid());
        assert_eq!(
            report.issues,
            vec![ValidationIssue::QNotIndefinite {
                trivial_probability: Some(0.0)
            }]
        );
        assert!(report.to_string().contains("Q not indefinite"));

        let neg = ProblemSpec::new(-1.0, -2.0, c(0.5, 0.0), Complex2x2::identity(), vec![[c(0.0, 0.0); 2]]);
        assert_eq!(neg.trivial_probability(), Some(1.0));
    }

    #[test]
    fn r_must_be_positive_definite() {
        let spec = ProblemSpec::new(
            0.0,
            0.0,
            c(1.0, 0.0),
            Complex2x2::from_real(1.0, 2.0, 2.0, 1.0),
            vec![[c(0.0, 0.0); 2]],
        );
        let report = spec.validate();
        assert!(report.has(|i| *i == ValidationIssue::RNotPositiveDefinite));
        assert!(!report.has(|i| *i == ValidationIssue::RNotHermitian));
    }

    #[test]
    fn r_must_be_hermitian() {
        let r = Complex2x2::new(c(1.0, 0.0), c(0.1, 0.2), c(0.1, 0.2), c(1.0, 0.0));
        let spec = ProblemSpec::new(0.0, 0.0, c(1.0, 0.0), r, vec![[c(0.0, 0.0); 2]]);
        assert!(spec.validate().has(|i| *i == ValidationIssue::RNotHermitian));
    }

    #[test]
    fn empty_branch_list_is_rejected() {
        let spec = ProblemSpec::new(0.0, 0.0, c(1.0, 0.0), Complex2x2::identity(), vec![]);
        assert!(spec.validate().has(|i| *i == ValidationIssue::NoBranches));
    }

    #[test]
    fn complex_ab_constructor() {
        let r = Complex2x2::identity();
        let m = vec![[c(0.0, 0.0); 2]];
        assert!(ProblemSpec::from_complex_ab(c(1.0, 1e-13), c(-1.0, 0.0), c(0.5, 0.0), r, m.clone()).is_ok());
        assert!(ProblemSpec::from_complex_ab(c(1.0, 1e-6), c(-1.0, 0.0), c(0.5, 0.0), r, m).is_err());
    }

    #[test]
    fn build_q_matches_layout() {
        let rot = Complex64::from_polar(1.0, FRAC_PI_4);
        let q = build_q(0.0, 0.0, rot);
        assert_eq!(q.get(0, 1), rot.conj());
        assert_eq!(q.get(1, 0), rot);
        assert_eq!(build_q(1.0, 1.0, c(0.0, 0.0)), Complex2x2::identity());
        let q = build_q(1.0, -1.0, c(0.5, 0.0));
        assert_eq!(q, Complex2x2::from_real(1.0, 0.5, 0.5, -1.0));
        assert!(q.is_indefinite());
    }

    #[test]
    fn mu_conversions() {
        let mu = mu_from_r(&Complex2x2::identity()).unwrap();
        assert_eq!(mu, MuParams { mu_xx: 0.5, mu_yy: 0.5, mu_xy: c(0.0, 0.0) });
        let mu = mu_from_r(&Complex2x2::diag(2.0, 2.0)).unwrap();
        assert_eq!(mu, MuParams { mu_xx: 1.0, mu_yy: 1.0, mu_xy: c(0.0, 0.0) });
        assert!(mu_from_r(&Complex2x2::from_real(1.0, 2.0, 2.0, 1.0)).is_err());
        let bad = MuParams { mu_xx: 1.0, mu_yy: 1.0, mu_xy: c(1.0, 0.5) };
        assert!(r_from_mu(&bad).is_err());
    }
}

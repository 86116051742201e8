//! Closed-form algebra on 2x2 complex matrices.
//!
//! Everything here is exact-formula: determinants by expansion, inverses by
//! the adjugate, eigenvalues from trace and determinant, square roots of
//! positive definite matrices by the Cayley-Hamilton identity. No iteration.

use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Complex 2-vector, `[x, y]`.
pub type CVec2 = [Complex64; 2];

/// Determinants at or below this magnitude are treated as singular.
pub const SINGULAR_DET: f64 = 1e-300;

/// Relative tolerance used by the Hermitian and definiteness predicates.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Relative slack on a negative discriminant before it is rejected.
pub const DISCRIMINANT_TOL: f64 = 1e-10;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Dense 2x2 complex matrix stored row-major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Complex2x2 {
    m: [[Complex64; 2]; 2],
}

impl Complex2x2 {
    pub const fn new(a11: Complex64, a12: Complex64, a21: Complex64, a22: Complex64) -> Self {
        Self {
            m: [[a11, a12], [a21, a22]],
        }
    }

    pub const fn from_rows(rows: [[Complex64; 2]; 2]) -> Self {
        Self { m: rows }
    }

    pub fn from_real(a11: f64, a12: f64, a21: f64, a22: f64) -> Self {
        Self::new(a11.into(), a12.into(), a21.into(), a22.into())
    }

    pub const fn identity() -> Self {
        Self::new(ONE, ZERO, ZERO, ONE)
    }

    pub const fn zero() -> Self {
        Self::new(ZERO, ZERO, ZERO, ZERO)
    }

    pub fn diag(d1: f64, d2: f64) -> Self {
        Self::from_real(d1, 0.0, 0.0, d2)
    }

    pub fn scaled_identity(s: Complex64) -> Self {
        Self::new(s, ZERO, ZERO, s)
    }

    /// Hermitian matrix `[[a, conj(c)], [c, b]]`.
    pub fn hermitian_from(a: f64, b: f64, c: Complex64) -> Self {
        Self::new(a.into(), c.conj(), c, b.into())
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.m[row][col]
    }

    pub fn rows(&self) -> [[Complex64; 2]; 2] {
        self.m
    }

    pub fn det(&self) -> Complex64 {
        self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0]
    }

    pub fn trace(&self) -> Complex64 {
        self.m[0][0] + self.m[1][1]
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self::new(
            self.m[0][0].conj(),
            self.m[1][0].conj(),
            self.m[0][1].conj(),
            self.m[1][1].conj(),
        )
    }

    /// Classical adjugate, so that `M * adj(M) = det(M) I`.
    pub fn adjugate(&self) -> Self {
        Self::new(self.m[1][1], -self.m[0][1], -self.m[1][0], self.m[0][0])
    }

    pub fn inverse(&self) -> Result<Self> {
        let det = self.det();
        if det.norm() <= SINGULAR_DET {
            return Err(Error::Singular { det: det.norm() });
        }
        Ok(self.adjugate().scale(det.inv()))
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self::new(
            self.m[0][0] * s,
            self.m[0][1] * s,
            self.m[1][0] * s,
            self.m[1][1] * s,
        )
    }

    pub fn mul_vec(&self, v: &CVec2) -> CVec2 {
        [
            self.m[0][0] * v[0] + self.m[0][1] * v[1],
            self.m[1][0] * v[0] + self.m[1][1] * v[1],
        ]
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.m
            .iter()
            .flatten()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    pub fn is_hermitian(&self) -> bool {
        let tol = HERMITIAN_TOL * self.max_abs().max(f64::MIN_POSITIVE);
        (self.m[0][1] - self.m[1][0].conj()).norm() <= tol
            && self.m[0][0].im.abs() <= tol
            && self.m[1][1].im.abs() <= tol
    }

    /// Hermitian with positive real diagonal and positive determinant.
    pub fn is_positive_definite(&self) -> bool {
        if !self.is_hermitian() {
            return false;
        }
        let tol = HERMITIAN_TOL * self.max_abs().powi(2);
        self.m[0][0].re > 0.0 && self.m[1][1].re > 0.0 && self.det().re > tol
    }

    /// Hermitian with strictly negative determinant, i.e. one eigenvalue of each sign.
    pub fn is_indefinite(&self) -> bool {
        if !self.is_hermitian() {
            return false;
        }
        let tol = HERMITIAN_TOL * self.max_abs().powi(2);
        self.det().re < -tol
    }

    /// Largest entrywise difference to `other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        (*self - *other).max_abs()
    }
}

impl Add for Complex2x2 {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(
            self.m[0][0] + o.m[0][0],
            self.m[0][1] + o.m[0][1],
            self.m[1][0] + o.m[1][0],
            self.m[1][1] + o.m[1][1],
        )
    }
}

impl Sub for Complex2x2 {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(
            self.m[0][0] - o.m[0][0],
            self.m[0][1] - o.m[0][1],
            self.m[1][0] - o.m[1][0],
            self.m[1][1] - o.m[1][1],
        )
    }
}

impl Neg for Complex2x2 {
    type Output = Self;
    fn neg(self) -> Self {
        self.scale(-ONE)
    }
}

impl Mul for Complex2x2 {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        let a = &self.m;
        let b = &o.m;
        Self::new(
            a[0][0] * b[0][0] + a[0][1] * b[1][0],
            a[0][0] * b[0][1] + a[0][1] * b[1][1],
            a[1][0] * b[0][0] + a[1][1] * b[1][0],
            a[1][0] * b[0][1] + a[1][1] * b[1][1],
        )
    }
}

impl Mul<Complex64> for Complex2x2 {
    type Output = Self;
    fn mul(self, s: Complex64) -> Self {
        self.scale(s)
    }
}

impl Mul<f64> for Complex2x2 {
    type Output = Self;
    fn mul(self, s: f64) -> Self {
        self.scale(s.into())
    }
}

pub fn det(m: &Complex2x2) -> Complex64 {
    m.det()
}

pub fn inverse(m: &Complex2x2) -> Result<Complex2x2> {
    m.inverse()
}

/// `(|M1| M1^-1 + |M2| M2^-1) / |M1 + M2|`, which equals `(M1 + M2)^-1` for
/// 2x2 matrices whenever all three are nonsingular.
pub fn sum_inverse_identity(m1: &Complex2x2, m2: &Complex2x2) -> Result<Complex2x2> {
    let d1 = m1.det();
    let d2 = m2.det();
    let dsum = (*m1 + *m2).det();
    for d in [d1, d2, dsum] {
        if d.norm() <= SINGULAR_DET {
            return Err(Error::Singular { det: d.norm() });
        }
    }
    let lhs = m1.inverse()?.scale(d1) + m2.inverse()?.scale(d2);
    Ok(lhs.scale(dsum.inv()))
}

/// Ordered real eigenvalues of `RQ` with the positive root first.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenPair {
    pub delta1: f64,
    pub delta2: f64,
}

impl EigenPair {
    /// `|delta1 / delta2|`.
    pub fn ratio(&self) -> f64 {
        self.delta1 / -self.delta2
    }
}

/// Both eigenvalues of `RQ` for Hermitian `R`, `Q`, largest first.
///
/// Uses the trace/determinant quadratic with the larger-magnitude root
/// computed first and the other obtained as `det / root`.
pub fn eigenvalues_rq(r: &Complex2x2, q: &Complex2x2) -> Result<(f64, f64)> {
    let rq = *r * *q;
    let tr = rq.trace().re;
    let det = rq.det().re;
    let mut disc = tr * tr - 4.0 * det;
    if disc < 0.0 {
        if disc >= -DISCRIMINANT_TOL * tr * tr {
            disc = 0.0;
        } else {
            return Err(Error::NegativeDiscriminant { disc });
        }
    }
    let sq = disc.sqrt();
    let big = if tr >= 0.0 {
        0.5 * (tr + sq)
    } else {
        0.5 * (tr - sq)
    };
    let small = if big == 0.0 { 0.0 } else { det / big };
    Ok(if big >= small {
        (big, small)
    } else {
        (small, big)
    })
}

/// Eigenvalues of `RQ` for positive definite `R` and indefinite `Q`.
pub fn eigen_rq(r: &Complex2x2, q: &Complex2x2) -> Result<EigenPair> {
    if !r.is_positive_definite() {
        return Err(Error::NotPositiveDefinite);
    }
    if !q.is_indefinite() {
        return Err(Error::Argument("Q is not indefinite".into()));
    }
    let (delta1, delta2) = eigenvalues_rq(r, q)?;
    if !(delta1 > 0.0 && delta2 < 0.0) {
        return Err(Error::Numerical(format!(
            "eigenvalues of RQ lost their sign pattern: ({delta1}, {delta2})"
        )));
    }
    Ok(EigenPair { delta1, delta2 })
}

/// Hermitian positive definite square root, `S = (R + sqrt|R| I) / sqrt(tr R + 2 sqrt|R|)`.
pub fn sqrt_pd(r: &Complex2x2) -> Result<Complex2x2> {
    if !r.is_positive_definite() {
        return Err(Error::NotPositiveDefinite);
    }
    let s = r.det().re.sqrt();
    let t = (r.trace().re + 2.0 * s).sqrt();
    Ok((*r + Complex2x2::scaled_identity(s.into())).scale((1.0 / t).into()))
}

/// `m^H M m`.
pub fn quad_form(m: &CVec2, mat: &Complex2x2) -> Complex64 {
    let v = mat.mul_vec(m);
    m[0].conj() * v[0] + m[1].conj() * v[1]
}

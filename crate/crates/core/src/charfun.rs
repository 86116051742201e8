//! Characteristic functions of `d_k = z_k^H Q z_k` and of their sum `D`.
//!
//! Three equivalent evaluators are provided. [`cf_rearranged`] is the one the
//! rest of the crate uses; [`cf_turin`] works directly from the matrices and
//! [`cf_proakis`] from the legacy scalar parameters, and both exist so the
//! three can be checked against each other.

use num_complex::Complex64;

use crate::closed_form::LegacyParams;
use crate::error::{Error, Result};
use crate::linalg2::{eigen_rq, quad_form, Complex2x2, EigenPair};
use crate::model::ProblemSpec;

const J: Complex64 = Complex64::new(0.0, 1.0);

/// Per-branch scalars `m^H Q m` and `m^H R^-1 m`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchDigest {
    pub mean_energy_q: f64,
    pub mean_energy_rinv: f64,
}

/// A validated problem with everything the CF evaluators need precomputed.
#[derive(Debug, Clone)]
pub struct Prepared {
    spec: ProblemSpec,
    q: Complex2x2,
    r_inv: Complex2x2,
    eigen: EigenPair,
    branches: Vec<BranchDigest>,
}

impl Prepared {
    pub fn new(spec: &ProblemSpec) -> Result<Self> {
        spec.require_valid()?;
        let q = spec.q();
        let r_inv = spec.r().inverse()?;
        let eigen = eigen_rq(spec.r(), &q)?;
        let branches = spec
            .means()
            .iter()
            .map(|m| BranchDigest {
                mean_energy_q: quad_form(m, &q).re,
                mean_energy_rinv: quad_form(m, &r_inv).re,
            })
            .collect();
        Ok(Self {
            spec: spec.clone(),
            q,
            r_inv,
            eigen,
            branches,
        })
    }

    pub fn spec(&self) -> &ProblemSpec {
        &self.spec
    }

    pub fn q(&self) -> &Complex2x2 {
        &self.q
    }

    pub fn r_inv(&self) -> &Complex2x2 {
        &self.r_inv
    }

    pub fn eigen(&self) -> EigenPair {
        self.eigen
    }

    pub fn branches(&self) -> &[BranchDigest] {
        &self.branches
    }

    /// `E{D} = sum_k m_k^H Q m_k + L tr(RQ)`.
    pub fn mean(&self) -> f64 {
        let tr = self.eigen.delta1 + self.eigen.delta2;
        self.branches.iter().map(|b| b.mean_energy_q + tr).sum()
    }

    fn branch(&self, k: usize) -> Result<&BranchDigest> {
        self.branches.get(k).ok_or_else(|| {
            Error::Argument(format!("branch index {k} out of range 0..{}", self.branches.len()))
        })
    }
}

/// Matrix form: `exp(-m^H R^-1 [I - (I - j u RQ)^-1] m) / |I - j u RQ|`.
pub fn cf_turin(p: &Prepared, k: usize, upsilon: f64) -> Result<Complex64> {
    p.branch(k)?;
    let m = &p.spec.means()[k];
    let i = Complex2x2::identity();
    let rq = *p.spec.r() * p.q;
    let a = i - rq.scale(J * upsilon);
    let inner = p.r_inv * (i - a.inverse()?);
    Ok((-quad_form(m, &inner)).exp() / a.det())
}

/// Eigenvalue form:
/// `exp[(j u m^H Q m + u^2 d1 d2 m^H R^-1 m) / ((1 - j u d1)(1 - j u d2))] / ((1 - j u d1)(1 - j u d2))`.
pub fn cf_rearranged(p: &Prepared, k: usize, upsilon: f64) -> Result<Complex64> {
    let b = p.branch(k)?;
    Ok(rearranged_term(p.eigen, b, upsilon))
}

#[inline]
fn rearranged_term(e: EigenPair, b: &BranchDigest, upsilon: f64) -> Complex64 {
    let den = (Complex64::new(1.0, -upsilon * e.delta1)) * Complex64::new(1.0, -upsilon * e.delta2);
    let num = J * (upsilon * b.mean_energy_q)
        + Complex64::from(upsilon * upsilon * e.delta1 * e.delta2 * b.mean_energy_rinv);
    (num / den).exp() / den
}

/// Legacy scalar form:
/// `v1 v2 / ((u + j v1)(u - j v2)) exp[v1 v2 (-u^2 alpha1_k + j u alpha2_k) / ((u + j v1)(u - j v2))]`.
pub fn cf_proakis(params: &LegacyParams, k: usize, upsilon: f64) -> Result<Complex64> {
    let (a1, a2) = match (params.alpha1.get(k), params.alpha2.get(k)) {
        (Some(a1), Some(a2)) => (*a1, *a2),
        _ => {
            return Err(Error::Argument(format!(
                "branch index {k} out of range 0..{}",
                params.alpha1.len()
            )))
        }
    };
    let vv = params.v1 * params.v2;
    let den = Complex64::new(upsilon, params.v1) * Complex64::new(upsilon, -params.v2);
    let expo = Complex64::new(-upsilon * upsilon * a1, upsilon * a2) * vv / den;
    Ok(expo.exp() * vv / den)
}

/// `phi_D(u) = prod_k phi_k(u)`.
pub fn cf_d(p: &Prepared, upsilon: f64) -> Complex64 {
    p.branches
        .iter()
        .map(|b| rearranged_term(p.eigen, b, upsilon))
        .product()
}

/// Product of legacy-form branch CFs.
pub fn cf_d_proakis(params: &LegacyParams, upsilon: f64) -> Result<Complex64> {
    (0..params.alpha1.len()).map(|k| cf_proakis(params, k, upsilon)).product()
}

/// `[-50, 50]` on 2001 uniform points plus 100 log-spaced points in `[50, 1e6]`
/// and their negatives.
pub fn equivalence_grid() -> Vec<f64> {
    let mut g: Vec<f64> = (0..2001).map(|i| -50.0 + 0.05 * i as f64).collect();
    let (lo, hi) = (50f64.ln(), 1e6f64.ln());
    for i in 0..100 {
        let u = (lo + (hi - lo) * i as f64 / 99.0).exp();
        g.push(u);
        g.push(-u);
    }
    g
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closed_form::{legacy_params, Variant};

    fn example() -> Prepared {
        Prepared::new(&ProblemSpec::rotated_product_example()).unwrap()
    }

    #[test]
    fn normalized_at_origin() {
        let p = example();
        assert_eq!(cf_rearranged(&p, 0, 0.0).unwrap(), Complex64::new(1.0, 0.0));
        assert!((cf_turin(&p, 0, 0.0).unwrap() - 1.0).norm() < 1e-15);
        assert_eq!(cf_d(&p, 0.0), Complex64::new(1.0, 0.0));
        let lp = legacy_params(p.spec(), Variant::Corrected).unwrap();
        assert!((cf_proakis(&lp, 0, 0.0).unwrap() - 1.0).norm() < 1e-15);
    }

    #[test]
    fn example_at_one_by_hand() {
        // exponent -2 / 2, denominator (1 - j)(1 + j) = 2
        let want = Complex64::new((-1.0f64).exp() / 2.0, 0.0);
        let p = example();
        assert!((cf_rearranged(&p, 0, 1.0).unwrap() - want).norm() < 1e-15);
        assert!((cf_rearranged(&p, 0, -1.0).unwrap() - want.conj()).norm() < 1e-15);
        assert!((cf_turin(&p, 0, 1.0).unwrap() - want).norm() < 1e-13);
        let lp = legacy_params(p.spec(), Variant::Corrected).unwrap();
        assert!((cf_proakis(&lp, 0, 1.0).unwrap() - want).norm() < 1e-13);
    }

    #[test]
    fn as_published_params_give_a_different_cf() {
        let p = example();
        let lp = legacy_params(p.spec(), Variant::AsPublished).unwrap();
        let legacy = cf_proakis(&lp, 0, 1.0).unwrap();
        let right = cf_rearranged(&p, 0, 1.0).unwrap();
        // alpha2 = 2 instead of 0 adds a phase of e^{j}: |e^{j}-1| e^{-1}/2 ~ 0.176
        let gap = (legacy - right).norm();
        assert!(gap > 1e-3);
        assert!((gap - 0.17637079922503196).abs() < 1e-12, "{gap}");
    }

    #[test]
    fn zero_mean_collapses_to_determinant() {
        let spec = ProblemSpec::rotated_product_example().with_means(vec![[Complex64::new(0.0, 0.0); 2]; 2]);
        let p = Prepared::new(&spec).unwrap();
        for &u in &[-3.0, 0.5, 7.0] {
            let one = Complex64::new(1.0, -u) * Complex64::new(1.0, u);
            let want = (one * one).inv();
            assert!((cf_d(&p, u) - want).norm() < 1e-15);
            assert!((cf_turin(&p, 0, u).unwrap() - one.inv()).norm() < 1e-15);
        }
    }

    #[test]
    fn identical_branches_square() {
        let base = ProblemSpec::rotated_product_example();
        let m = base.means()[0];
        let p2 = Prepared::new(&base.with_means(vec![m, m])).unwrap();
        let p1 = example();
        for &u in &[0.3, 2.0, -11.0] {
            let one = cf_rearranged(&p1, 0, u).unwrap();
            assert!((cf_d(&p2, u) - one * one).norm() < 1e-13);
            assert!((cf_d(&p1, u) - one).norm() == 0.0);
        }
    }

    #[test]
    fn branch_index_checked() {
        let p = example();
        assert!(cf_rearranged(&p, 1, 0.0).is_err());
        assert!(cf_turin(&p, 3, 0.0).is_err());
    }

    #[test]
    fn grid_shape() {
        let g = equivalence_grid();
        assert_eq!(g.len(), 2201);
        assert!(g.iter().any(|&u| (u - 1e6).abs() < 1e-3));
    }
}

//! Seeded generation of random valid problems for property checks.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::linalg2::Complex2x2;
use crate::model::ProblemSpec;

/// Constraint on the cross coefficient `C`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CKind {
    Any,
    Real,
    /// `|Im C| >= min_imag`.
    Complex { min_imag: f64 },
}

/// Smallest `|C|^2 - AB` produced, keeping `Q` away from semidefinite.
pub const MIN_INDEFINITENESS: f64 = 0.1;

/// Smallest eigenvalue floor added to `R`.
const R_FLOOR: f64 = 0.2;

fn normal_c<R: Rng + ?Sized>(rng: &mut R, sd: f64) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re * sd, im * sd)
}

/// A valid problem with `branches` branches.
///
/// `A, B` are uniform on `[-1.5, 1.5]`, `R = G G^H / 2 + 0.2 I` with standard
/// complex normal `G`, and mean entries are complex normal with standard
/// deviation 0.7 per component.
pub fn random_valid_spec<R: Rng + ?Sized>(rng: &mut R, branches: usize, c_kind: CKind) -> ProblemSpec {
    let (a, b, c) = loop {
        let a: f64 = rng.random_range(-1.5..1.5);
        let b: f64 = rng.random_range(-1.5..1.5);
        let re: f64 = rng.random_range(-1.5..1.5);
        let c = match c_kind {
            CKind::Any => Complex64::new(re, rng.random_range(-1.5..1.5)),
            CKind::Real => Complex64::new(re, 0.0),
            CKind::Complex { min_imag } => {
                let mag: f64 = rng.random_range(min_imag..min_imag.max(1.5) + 0.5);
                let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
                Complex64::new(re, sign * mag)
            }
        };
        if c.norm_sqr() - a * b >= MIN_INDEFINITENESS {
            break (a, b, c);
        }
    };
    let g = Complex2x2::new(
        normal_c(rng, 1.0),
        normal_c(rng, 1.0),
        normal_c(rng, 1.0),
        normal_c(rng, 1.0),
    );
    let gg = g * g.adjoint();
    // Symmetrize to remove rounding asymmetry in the off-diagonal.
    let off = 0.5 * (gg.get(0, 1) + gg.get(1, 0).conj());
    let r = Complex2x2::new(
        (0.5 * gg.get(0, 0).re + R_FLOOR).into(),
        off * 0.5,
        off.conj() * 0.5,
        (0.5 * gg.get(1, 1).re + R_FLOOR).into(),
    );
    let means = (0..branches)
        .map(|_| [normal_c(rng, 0.7), normal_c(rng, 0.7)])
        .collect();
    ProblemSpec::new(a, b, c, r, means)
}

/// Deterministic stream of specs: spec `i` uses its own generator stream,
/// with `L` cycling through `1..=max_branches`.
pub fn seeded_specs(seed: u64, count: usize, max_branches: usize, c_kind: CKind) -> Vec<ProblemSpec> {
    (0..count)
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            random_valid_spec(&mut rng, 1 + i % max_branches.max(1), c_kind)
        })
        .collect()
}

/// Pair of complex normal matrices with `M1`, `M2` and `M1 + M2` all
/// satisfying `|det| >= min_rel_det * max_abs^2`.
pub fn random_nonsingular_pair<R: Rng + ?Sized>(rng: &mut R, min_rel_det: f64) -> (Complex2x2, Complex2x2) {
    let well_posed = |m: &Complex2x2| m.det().norm() >= min_rel_det * m.max_abs().powi(2);
    loop {
        let mut draw = || {
            Complex2x2::new(
                normal_c(rng, 1.0),
                normal_c(rng, 1.0),
                normal_c(rng, 1.0),
                normal_c(rng, 1.0),
            )
        };
        let (m1, m2) = (draw(), draw());
        if well_posed(&m1) && well_posed(&m2) && well_posed(&(m1 + m2)) {
            return (m1, m2);
        }
    }
}

use proptest::prelude::*;
use qform::closed_form::{eigen_params, legacy_params, probability, probability_corrected, probability_legacy, Variant};
use qform::charfun::Prepared;
use qform::linalg2::{eigen_rq, quad_form, sqrt_pd, sum_inverse_identity};
use qform::model::{mu_from_r, r_from_mu};
use qform::random::{random_nonsingular_pair, random_valid_spec, CKind};
use qform::{CVec2, Complex2x2, Complex64, ProblemSpec};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn spec_from(seed: u64, l: usize, kind: CKind) -> ProblemSpec {
    random_valid_spec(&mut ChaCha8Rng::seed_from_u64(seed), l, kind)
}

fn c() -> impl Strategy<Value = Complex64> {
    (-3.0..3.0f64, -3.0..3.0f64).prop_map(|(re, im)| Complex64::new(re, im))
}

fn vec2() -> impl Strategy<Value = CVec2> {
    (c(), c()).prop_map(|(x, y)| [x, y])
}

fn matrix() -> impl Strategy<Value = Complex2x2> {
    (c(), c(), c(), c()).prop_map(|(a, b, c, d)| Complex2x2::new(a, b, c, d))
}

/// Eigenvalues of a Hermitian 2x2 matrix, larger first.
fn hermitian_eigenvalues(s: &Complex2x2) -> (f64, f64) {
    let (p, q) = (s.get(0, 0).re, s.get(1, 1).re);
    let h = 0.5 * (p - q);
    let rad = (h * h + s.get(0, 1).norm_sqr()).sqrt();
    (0.5 * (p + q) + rad, 0.5 * (p + q) - rad)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn rq_has_one_eigenvalue_of_each_sign(seed: u64, l in 1usize..=4) {
        let spec = spec_from(seed, l, CKind::Any);
        let e = eigen_rq(spec.r(), &spec.q()).unwrap();
        prop_assert!(e.delta1 > 0.0 && e.delta2 < 0.0, "{e:?}");
    }

    #[test]
    fn mu_round_trip(seed: u64) {
        let r = *spec_from(seed, 1, CKind::Any).r();
        let mu = mu_from_r(&r).unwrap();
        let back = r_from_mu(&mu).unwrap();
        prop_assert!(back.max_abs_diff(&r) <= 4.0 * f64::EPSILON * r.max_abs());
        prop_assert_eq!(mu_from_r(&back).unwrap(), mu);
    }

    #[test]
    fn eigenvalues_match_symmetrized_form(seed: u64) {
        let spec = spec_from(seed, 1, CKind::Any);
        let e = eigen_rq(spec.r(), &spec.q()).unwrap();
        let h = sqrt_pd(spec.r()).unwrap();
        let (s1, s2) = hermitian_eigenvalues(&(h * spec.q() * h));
        let scale = e.delta1.abs().max(e.delta2.abs());
        prop_assert!((e.delta1 - s1).abs() < 1e-10 * scale);
        prop_assert!((e.delta2 - s2).abs() < 1e-10 * scale);
    }

    #[test]
    fn sum_inverse_identity_matches_inverse(seed: u64) {
        let (m1, m2) = random_nonsingular_pair(&mut ChaCha8Rng::seed_from_u64(seed), 0.05);
        let want = (m1 + m2).inverse().unwrap();
        let got = sum_inverse_identity(&m1, &m2).unwrap();
        prop_assert!(got.max_abs_diff(&want) <= 1e-12 * want.max_abs());
    }

    #[test]
    fn quad_form_conjugate_symmetric(m in vec2(), mat in matrix()) {
        let lhs = quad_form(&m, &mat.adjoint());
        let rhs = quad_form(&m, &mat).conj();
        prop_assert!((lhs - rhs).norm() <= 1e-13 * (1.0 + rhs.norm()));
    }

    #[test]
    fn radicand_sign_theorem(seed: u64, m in vec2()) {
        let spec = spec_from(seed, 1, CKind::Any);
        let p = Prepared::new(&spec).unwrap();
        let e = p.eigen();
        let upper = *p.q() - p.r_inv().scale(e.delta1.into());
        let lower = *p.q() - p.r_inv().scale(e.delta2.into());
        let energy = quad_form(&m, p.r_inv()).re * e.delta1.abs().max(e.delta2.abs());
        prop_assert!(quad_form(&m, &upper).re <= 1e-12 * energy);
        prop_assert!(quad_form(&m, &lower).re >= -1e-12 * energy);
    }

    #[test]
    fn corrected_legacy_parameters_bridge(seed: u64, l in 1usize..=4) {
        let spec = spec_from(seed, l, CKind::Any);
        let p = Prepared::new(&spec).unwrap();
        let e = p.eigen();
        let lp = legacy_params(&spec, Variant::Corrected).unwrap();
        let close = |x: f64, y: f64| (x - y).abs() <= 1e-10 * (1.0 + y.abs());
        prop_assert!(close(lp.v1, 1.0 / e.delta1));
        prop_assert!(close(lp.v2, -1.0 / e.delta2));
        for (k, b) in p.branches().iter().enumerate() {
            prop_assert!(close(lp.alpha1[k], -e.delta1 * e.delta2 * b.mean_energy_rinv));
            prop_assert!(close(lp.alpha2[k], b.mean_energy_q));
        }
        let ep = eigen_params(&p).unwrap();
        prop_assert!(close(lp.a, ep.a) && close(lp.b, ep.b));
    }

    #[test]
    fn corrected_legacy_and_eigen_probabilities_agree(seed: u64, l in 1usize..=4) {
        let spec = spec_from(seed, l, CKind::Any);
        let (_, pe) = probability_corrected(&Prepared::new(&spec).unwrap()).unwrap();
        let pl = probability_legacy(&spec, Variant::Corrected).unwrap();
        prop_assert!((pe - pl).abs() < 1e-10, "{pe} vs {pl}");
        prop_assert!((0.0..=1.0).contains(&pe));
    }

    #[test]
    fn probability_invariant_under_positive_q_scaling(seed: u64, l in 1usize..=4, log_c in -2.0..2.0f64) {
        let spec = spec_from(seed, l, CKind::Any);
        let p = probability(&spec).unwrap().p_corrected;
        let ps = probability(&spec.with_q_scaled(10f64.powf(log_c))).unwrap().p_corrected;
        prop_assert!((p - ps).abs() < 1e-10, "{p} vs {ps}");
    }

    #[test]
    fn real_c_variants_coincide(seed: u64, l in 1usize..=4) {
        let spec = spec_from(seed, l, CKind::Real);
        let a = legacy_params(&spec, Variant::AsPublished).unwrap();
        let b = legacy_params(&spec, Variant::Corrected).unwrap();
        prop_assert!((a.w - b.w).abs() < 1e-12 && (a.a - b.a).abs() < 1e-12 && (a.b - b.b).abs() < 1e-12);
        let r = probability(&spec).unwrap();
        prop_assert!((r.p_corrected - r.p_as_published.unwrap()).abs() < 1e-12);
    }

    #[test]
    fn validation_and_probability_agree(
        a in -2.0..2.0f64,
        b in -2.0..2.0f64,
        cc in c(),
        r11 in -1.0..3.0f64,
        r22 in -1.0..3.0f64,
        r12 in c(),
        means in prop::collection::vec(vec2(), 0..3),
    ) {
        let r = Complex2x2::hermitian_from(r11, r22, r12);
        let spec = ProblemSpec::new(a, b, cc, r, means);
        let valid = spec.validate().is_valid();
        match probability(&spec) {
            Ok(_) => prop_assert!(valid),
            Err(e) => {
                prop_assert!(!valid, "valid spec rejected: {e}");
                prop_assert!(e.is_validation());
            }
        }
    }
}

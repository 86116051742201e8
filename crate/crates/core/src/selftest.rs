//! Built-in golden checks, with swappable hooks so that deliberately broken
//! implementations can be shown to fail them.

use std::fmt;

use crate::charfun::Prepared;
use crate::closed_form::{eigen_params, legacy_params, series_with, LegacyParams, Variant};
use crate::error::Result;
use crate::model::ProblemSpec;
use crate::oracles::{estimate_probability, invert_prepared, McConfig, DEFAULT_QUAD_TOL};
use crate::random::{seeded_specs, CKind};
use crate::specfun::{bessel_i_scaled, bessel_i_scaled_sequence, marcum_q1};

/// Seed of the random specs used by the agreement check.
pub const AGREEMENT_SEED: u64 = 0x5EED_0001;
pub const AGREEMENT_SPECS: usize = 20;
pub const AGREEMENT_SAMPLES: u64 = 100_000;

/// Published value of the as-published probability for the rotated example.
pub const AS_PUBLISHED_PROBABILITY: f64 = 0.18394;

pub type MarcumFn = fn(f64, f64) -> Result<f64>;
pub type ParamsFn = fn(&ProblemSpec) -> Result<LegacyParams>;

/// Implementations exercised by the checks.
#[derive(Clone, Copy)]
pub struct Hooks {
    pub marcum_q1: MarcumFn,
    pub corrected_params: ParamsFn,
}

fn corrected(spec: &ProblemSpec) -> Result<LegacyParams> {
    legacy_params(spec, Variant::Corrected)
}

fn as_published(spec: &ProblemSpec) -> Result<LegacyParams> {
    legacy_params(spec, Variant::AsPublished)
}

/// `Q1` series cut after its first two terms.
fn truncated_marcum_q1(a: f64, b: f64) -> Result<f64> {
    if b == 0.0 {
        return Ok(1.0);
    }
    if a == 0.0 {
        return Ok((-0.5 * b * b).exp());
    }
    let i = bessel_i_scaled_sequence(1, a * b)?;
    let pre = (-0.5 * (a - b).powi(2)).exp();
    Ok(if b >= a {
        pre * (i[0] + a / b * i[1])
    } else {
        1.0 - pre * (b / a * i[1])
    })
}

impl Default for Hooks {
    fn default() -> Self {
        Self {
            marcum_q1,
            corrected_params: corrected,
        }
    }
}

/// Known-bad implementations, for demonstrating that the checks bite.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mutation {
    /// Marcum series truncated at two terms.
    TruncatedMarcum,
    /// As-published legacy formulas used where corrected ones are expected.
    AsPublishedAsCorrected,
}

impl Hooks {
    pub fn mutated(m: Mutation) -> Self {
        let mut h = Self::default();
        match m {
            Mutation::TruncatedMarcum => h.marcum_q1 = truncated_marcum_q1,
            Mutation::AsPublishedAsCorrected => h.corrected_params = as_published,
        }
        h
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl fmt::Display for CheckResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{tag} {}: {}", self.name, self.detail)
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SelftestReport {
    pub checks: Vec<CheckResult>,
}

impl SelftestReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failed(&self) -> impl Iterator<Item = &CheckResult> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

fn outcome(name: &'static str, r: Result<(bool, String)>) -> CheckResult {
    match r {
        Ok((passed, detail)) => CheckResult { name, passed, detail },
        Err(e) => CheckResult {
            name,
            passed: false,
            detail: format!("error: {e}"),
        },
    }
}

fn legacy_probability(lp: &LegacyParams, hooks: &Hooks) -> Result<f64> {
    series_with(lp.a, lp.b, lp.v2 / lp.v1, lp.branches(), hooks.marcum_q1)
}

fn table_corrected(hooks: &Hooks) -> Result<(bool, String)> {
    let spec = ProblemSpec::rotated_product_example();
    let lp = (hooks.corrected_params)(&spec)?;
    let want = [
        ("w", lp.w, 0.0),
        ("v1", lp.v1, 1.0),
        ("v2", lp.v2, 1.0),
        ("alpha1", lp.alpha1[0], 2.0),
        ("alpha2", lp.alpha2[0], 0.0),
        ("a", lp.a, 1.0),
        ("b", lp.b, 1.0),
    ];
    let mut bad: Vec<String> = want
        .iter()
        .filter(|(_, got, exp)| (got - exp).abs() > 1e-12)
        .map(|(n, got, exp)| format!("{n}={got} (want {exp})"))
        .collect();
    let p = legacy_probability(&lp, hooks)?;
    if (p - 0.5).abs() > 1e-12 {
        bad.push(format!("Pr={p} (want 0.5)"));
    }
    let e = eigen_params(&Prepared::new(&spec)?)?;
    let pe = series_with(e.a, e.b, e.delta1 / -e.delta2, 1, hooks.marcum_q1)?;
    if (pe - 0.5).abs() > 1e-12 {
        bad.push(format!("eigen-form Pr={pe} (want 0.5)"));
    }
    Ok(if bad.is_empty() {
        (true, format!("seven parameters exact, Pr={p}"))
    } else {
        (false, bad.join(", "))
    })
}

fn table_as_published(hooks: &Hooks) -> Result<(bool, String)> {
    let spec = ProblemSpec::rotated_product_example();
    let lp = as_published(&spec)?;
    let p = legacy_probability(&lp, hooks)?;
    let ok = (lp.alpha2[0] - 2.0).abs() <= 1e-12
        && lp.a.abs() <= 1e-12
        && (lp.b - 2f64.sqrt()).abs() <= 1e-12
        && (p - AS_PUBLISHED_PROBABILITY).abs() <= 5e-6;
    Ok((
        ok,
        format!("alpha2={} a={} b={} Pr={p}", lp.alpha2[0], lp.a, lp.b),
    ))
}

/// Largest residual of `Q1(a,a) = (1 + e^{-a^2} I0(a^2)) / 2` over `a = 0.1..=10`.
pub fn simon_residual(q1: MarcumFn) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for i in 1..=100 {
        let a = 0.1 * i as f64;
        let want = 0.5 * (1.0 + bessel_i_scaled(0, a * a)?);
        worst = worst.max((q1(a, a)? - want).abs());
    }
    Ok(worst)
}

fn simon(hooks: &Hooks) -> Result<(bool, String)> {
    let r = simon_residual(hooks.marcum_q1)?;
    Ok((r < 1e-10, format!("max residual {r:.3e} over a in [0.1, 10]")))
}

fn marcum_limits(hooks: &Hooks) -> Result<(bool, String)> {
    let mut worst: f64 = 0.0;
    for i in 0..=40 {
        let x = 0.25 * i as f64;
        worst = worst.max(((hooks.marcum_q1)(0.0, x)? - (-0.5 * x * x).exp()).abs());
        worst = worst.max(((hooks.marcum_q1)(x, 0.0)? - 1.0).abs());
    }
    Ok((worst < 1e-14, format!("max residual {worst:.3e}")))
}

fn agreement(hooks: &Hooks) -> Result<(bool, String)> {
    let specs = seeded_specs(AGREEMENT_SEED, AGREEMENT_SPECS, 4, CKind::Any);
    let mut worst_inv: f64 = 0.0;
    let mut mc_misses = 0;
    for (i, spec) in specs.iter().enumerate() {
        let prep = Prepared::new(spec)?;
        let e = eigen_params(&prep)?;
        let p = series_with(e.a, e.b, e.delta1 / -e.delta2, spec.branches(), hooks.marcum_q1)?;
        let inv = invert_prepared(&prep, DEFAULT_QUAD_TOL)?;
        worst_inv = worst_inv.max((p - inv.probability).abs());
        let mc = estimate_probability(spec, &McConfig::new(AGREEMENT_SAMPLES, AGREEMENT_SEED + i as u64))?;
        if !mc.consistent_with(p, 4.0) {
            mc_misses += 1;
        }
    }
    Ok((
        worst_inv < 1e-7 && mc_misses == 0,
        format!(
            "{} specs: max |closed - inversion| {worst_inv:.3e}, {mc_misses} outside 4 sigma MC",
            specs.len()
        ),
    ))
}

/// Runs every check with the given implementations.
pub fn run_with(hooks: &Hooks) -> SelftestReport {
    SelftestReport {
        checks: vec![
            outcome("rotated-example-corrected", table_corrected(hooks)),
            outcome("rotated-example-as-published", table_as_published(hooks)),
            outcome("marcum-simon-identity", simon(hooks)),
            outcome("marcum-limits", marcum_limits(hooks)),
            outcome("three-way-agreement", agreement(hooks)),
        ],
    }
}

pub fn run() -> SelftestReport {
    run_with(&Hooks::default())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn failed_names(r: &SelftestReport) -> Vec<&'static str> {
        r.failed().map(|c| c.name).collect()
    }

    #[test]
    fn clean_build_passes() {
        let r = run();
        assert!(r.all_passed(), "{:#?}", r.checks);
    }

    #[test]
    fn truncated_marcum_is_caught_by_simon() {
        let r = run_with(&Hooks::mutated(Mutation::TruncatedMarcum));
        assert!(failed_names(&r).contains(&"marcum-simon-identity"), "{:#?}", r.checks);
    }

    #[test]
    fn swapped_formulas_are_caught_by_table_check() {
        let r = run_with(&Hooks::mutated(Mutation::AsPublishedAsCorrected));
        let names = failed_names(&r);
        assert!(names.contains(&"rotated-example-corrected"), "{:#?}", r.checks);
        assert!(!names.contains(&"marcum-simon-identity"));
    }
}

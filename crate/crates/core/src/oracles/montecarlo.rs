//! Seeded Monte Carlo simulation of `D`.
//!
//! Work is split into fixed-size batches. Batch `i` draws from a ChaCha8
//! generator seeded with `seed` on stream `i`, so results do not depend on how
//! rayon schedules the batches. Normal variates come from the ziggurat
//! sampler in `rand_distr`.

use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg2::{quad_form, sqrt_pd, CVec2, Complex2x2};
use crate::model::ProblemSpec;

pub const DEFAULT_BATCH: u64 = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct McConfig {
    pub samples: u64,
    pub seed: u64,
    /// Samples per work unit.
    pub batch: u64,
}

impl McConfig {
    pub fn new(samples: u64, seed: u64) -> Self {
        Self {
            samples,
            seed,
            batch: DEFAULT_BATCH.min(samples.max(1)),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.samples < 1 || self.batch < 1 || self.batch > self.samples {
            return Err(Error::Argument(format!(
                "need 1 <= batch <= samples, got batch {} samples {}",
                self.batch, self.samples
            )));
        }
        Ok(())
    }

    pub fn batches(&self) -> u64 {
        self.samples.div_ceil(self.batch)
    }

    fn batch_len(&self, i: u64) -> u64 {
        self.batch.min(self.samples - i * self.batch)
    }

    /// Generator for batch `i`.
    pub fn rng(&self, i: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(i);
        rng
    }
}

impl Default for McConfig {
    fn default() -> Self {
        Self::new(1_000_000, 0)
    }
}

/// Runs `work(rng, len)` for every batch in parallel, returning results in
/// batch order.
pub(crate) fn run_batches<T, F>(cfg: &McConfig, work: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(&mut ChaCha8Rng, u64) -> T + Sync,
{
    cfg.validate()?;
    Ok((0..cfg.batches())
        .into_par_iter()
        .map(|i| work(&mut cfg.rng(i), cfg.batch_len(i)))
        .collect())
}

/// Draws `z_k = m_k + R^{1/2} w` with `w ~ CN(0, I)` and evaluates `D`.
#[derive(Debug, Clone)]
pub struct Sampler {
    sqrt_r: Complex2x2,
    q: Complex2x2,
    means: Vec<CVec2>,
}

impl Sampler {
    /// Requires only a positive definite `R`; `Q` may be anything Hermitian.
    pub fn new(spec: &ProblemSpec) -> Result<Self> {
        Ok(Self {
            sqrt_r: sqrt_pd(spec.r())?,
            q: spec.q(),
            means: spec.means().to_vec(),
        })
    }

    fn unit<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(re * FRAC_1_SQRT_2, im * FRAC_1_SQRT_2)
    }

    pub fn draw_z<R: Rng + ?Sized>(&self, rng: &mut R, k: usize) -> CVec2 {
        let w = [Self::unit(rng), Self::unit(rng)];
        let s = self.sqrt_r.mul_vec(&w);
        let m = self.means[k];
        [m[0] + s[0], m[1] + s[1]]
    }

    /// `D` before the imaginary part is dropped.
    pub fn draw_d_complex<R: Rng + ?Sized>(&self, rng: &mut R) -> Complex64 {
        (0..self.means.len())
            .map(|k| quad_form(&self.draw_z(rng, k), &self.q))
            .sum()
    }

    pub fn draw_d<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let d = self.draw_d_complex(rng);
        debug_assert!(d.im.abs() <= 1e-10 * (1.0 + d.re.abs()));
        d.re
    }
}

/// One draw of `D`. Prefer [`Sampler`] for repeated draws.
pub fn sample_d<R: Rng + ?Sized>(spec: &ProblemSpec, rng: &mut R) -> Result<f64> {
    Ok(Sampler::new(spec)?.draw_d(rng))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub p_hat: f64,
    pub std_err: f64,
    pub negatives: u64,
    pub samples: u64,
}

impl McEstimate {
    /// Whether `p` lies within `k` binomial standard deviations of the
    /// estimate, with the deviation evaluated at `p` itself.
    pub fn consistent_with(&self, p: f64, k: f64) -> bool {
        let sigma = (p * (1.0 - p) / self.samples as f64).sqrt();
        (self.p_hat - p).abs() <= k * sigma
    }
}

/// Fraction of simulated `D` below zero. Validity of the problem is not
/// checked, so semidefinite forms can be simulated too.
pub fn estimate_probability(spec: &ProblemSpec, cfg: &McConfig) -> Result<McEstimate> {
    let sampler = Sampler::new(spec)?;
    let counts = run_batches(cfg, |rng, len| {
        (0..len).filter(|_| sampler.draw_d(rng) < 0.0).count() as u64
    })?;
    let negatives: u64 = counts.iter().sum();
    let n = cfg.samples as f64;
    let p_hat = negatives as f64 / n;
    Ok(McEstimate {
        p_hat,
        std_err: (p_hat * (1.0 - p_hat) / n).sqrt(),
        negatives,
        samples: cfg.samples,
    })
}

use std::fmt::Write as _;
use std::io;
use std::path::Path;

use crate::error::{Error, Result};
use crate::model::ProblemSpec;
use crate::oracles::montecarlo::{run_batches, McConfig, Sampler};

/// Samples used to pick a default range.
pub const PILOT_SAMPLES: u64 = 10_000;

/// Half-width of the default range in pilot standard deviations.
pub const PILOT_SIGMAS: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum HistogramRange {
    Fixed(f64, f64),
    /// Pilot mean plus or minus [`PILOT_SIGMAS`] pilot standard deviations.
    Pilot,
    /// Like `Pilot`, widened to be symmetric about zero.
    PilotSymmetric,
    /// `PilotSymmetric` if the pilot range contains zero, else `Pilot`.
    /// Mirrored bins then pair `D` with `-D`.
    PilotAuto,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
    pub n_total: u64,
    pub below: u64,
    pub above: u64,
}

impl Histogram {
    pub fn empty(n_bins: usize, lo: f64, hi: f64) -> Result<Self> {
        if n_bins < 1 || !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::Argument(format!(
                "histogram needs n_bins >= 1 and finite lo < hi, got {n_bins} bins on [{lo}, {hi}]"
            )));
        }
        let width = hi - lo;
        let mut edges: Vec<f64> = (0..=n_bins)
            .map(|i| lo + width * i as f64 / n_bins as f64)
            .collect();
        edges[n_bins] = hi;
        Ok(Self {
            edges,
            counts: vec![0; n_bins],
            n_total: 0,
            below: 0,
            above: 0,
        })
    }

    pub fn n_bins(&self) -> usize {
        self.counts.len()
    }

    pub fn add(&mut self, x: f64) {
        self.n_total += 1;
        let lo = self.edges[0];
        let hi = self.edges[self.n_bins()];
        if x < lo {
            self.below += 1;
        } else if x > hi {
            self.above += 1;
        } else {
            let n = self.n_bins();
            let idx = (((x - lo) / (hi - lo)) * n as f64) as usize;
            self.counts[idx.min(n - 1)] += 1;
        }
    }

    fn merge(&mut self, other: &Histogram) {
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        self.n_total += other.n_total;
        self.below += other.below;
        self.above += other.above;
    }

    /// `sum_i |c_i - c_{n-1-i}| / n_total`.
    pub fn symmetry_statistic(&self) -> f64 {
        let n = self.n_bins();
        let diff: u64 = (0..n)
            .map(|i| self.counts[i].abs_diff(self.counts[n - 1 - i]))
            .sum();
        diff as f64 / self.n_total as f64
    }

    /// `4 sqrt(n_bins / n_total)`.
    pub fn symmetry_threshold(&self) -> f64 {
        4.0 * (self.n_bins() as f64 / self.n_total as f64).sqrt()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("bin_lo,bin_hi,count\n");
        for (i, c) in self.counts.iter().enumerate() {
            let _ = writeln!(out, "{},{},{}", self.edges[i], self.edges[i + 1], c);
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> io::Result<()> {
        std::fs::write(path, self.to_csv())
    }
}

fn pilot_range(sampler: &Sampler, cfg: &McConfig, range: HistogramRange) -> (f64, f64) {
    // Last stream, so the pilot never overlaps a main batch.
    let mut rng = cfg.rng(u64::MAX);
    let xs: Vec<f64> = (0..PILOT_SAMPLES).map(|_| sampler.draw_d(&mut rng)).collect();
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let sd = (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    let (lo, hi) = (mean - PILOT_SIGMAS * sd, mean + PILOT_SIGMAS * sd);
    let symmetric = match range {
        HistogramRange::PilotSymmetric => true,
        HistogramRange::PilotAuto => lo <= 0.0 && hi >= 0.0,
        _ => false,
    };
    if symmetric {
        let m = lo.abs().max(hi.abs());
        (-m, m)
    } else {
        (lo, hi)
    }
}

/// Histogram of `cfg.samples` draws of `D`.
pub fn histogram_d(
    spec: &ProblemSpec,
    cfg: &McConfig,
    n_bins: usize,
    range: HistogramRange,
) -> Result<Histogram> {
    let sampler = Sampler::new(spec)?;
    let (lo, hi) = match range {
        HistogramRange::Fixed(lo, hi) => (lo, hi),
        pilot => pilot_range(&sampler, cfg, pilot),
    };
    let template = Histogram::empty(n_bins, lo, hi)?;
    let parts = run_batches(cfg, |rng, len| {
        let mut h = template.clone();
        for _ in 0..len {
            h.add(sampler.draw_d(rng));
        }
        h
    })?;
    let mut total = template;
    for p in &parts {
        total.merge(p);
    }
    Ok(total)
}

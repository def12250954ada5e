use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

pub const DEFAULT_BINS: usize = 101;
pub const HISTOGRAM_PAD: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    /// `bins + 1` ascending edges.
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
}

impl Histogram {
    /// `bins` equal-width bins over `[min - pad, max + pad]`.
    pub fn new(values: &[f64], bins: usize) -> Result<Histogram> {
        if bins < 1 {
            return Err(LabError::invalid("histogram needs at least one bin"));
        }
        if values.is_empty() {
            return Err(LabError::invalid("histogram of no values"));
        }
        let (min, max) = values
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
        let lo = min - HISTOGRAM_PAD;
        let hi = max + HISTOGRAM_PAD;
        let width = (hi - lo) / bins as f64;
        let edges = (0..=bins)
            .map(|k| if k == bins { hi } else { lo + k as f64 * width })
            .collect();
        let mut counts = vec![0u64; bins];
        for &v in values {
            let k = (((v - lo) / width) as usize).min(bins - 1);
            counts[k] += 1;
        }
        Ok(Histogram { edges, counts })
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }
}

/// Empirical spectral distribution of one matrix (or a pooled sample).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EsdSummary {
    pub n: usize,
    pub eigenvalues: Vec<f64>,
    pub histogram: Histogram,
    /// `(1/n) sum lambda^h` for `h = 0..=h_max`.
    pub empirical_moments: Vec<f64>,
}

impl EsdSummary {
    /// `F(x) = #{lambda <= x} / n`.
    pub fn cdf(&self, x: f64) -> f64 {
        let count = self.eigenvalues.partition_point(|&v| v <= x);
        count as f64 / self.n as f64
    }

    pub fn moment(&self, h: usize) -> Option<f64> {
        self.empirical_moments.get(h).copied()
    }

    /// Fraction of eigenvalues in `[lo, hi]`.
    pub fn mass_within(&self, lo: f64, hi: f64) -> f64 {
        let below = self.eigenvalues.partition_point(|&v| v < lo);
        let upto = self.eigenvalues.partition_point(|&v| v <= hi);
        (upto - below) as f64 / self.n as f64
    }
}

/// `(1/n) sum lambda^h` for `h = 0..=h_max`.
pub fn power_moments(values: &[f64], h_max: usize) -> Vec<f64> {
    let n = values.len() as f64;
    let mut sums = vec![0.0; h_max + 1];
    for &v in values {
        let mut pow = 1.0;
        for s in sums.iter_mut() {
            *s += pow;
            pow *= v;
        }
    }
    sums.iter().map(|s| s / n).collect()
}

pub fn esd(evals: &[f64], bins: usize, h_max: usize) -> Result<EsdSummary> {
    if evals.is_empty() {
        return Err(LabError::invalid("empty spectrum"));
    }
    let mut eigenvalues = evals.to_vec();
    eigenvalues.sort_by(f64::total_cmp);
    let histogram = Histogram::new(&eigenvalues, bins)?;
    Ok(EsdSummary {
        n: eigenvalues.len(),
        empirical_moments: power_moments(&eigenvalues, h_max),
        eigenvalues,
        histogram,
    })
}

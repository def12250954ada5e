//! Eigenvalues, empirical spectral distributions, trace moments and W2.

mod eigen;
mod esd;
mod hutchinson;
mod structured;
mod wasserstein;

pub use eigen::{symmetric_eigen, symmetric_eigenvalues, Eigen};
pub use esd::{esd, power_moments, EsdSummary, Histogram, DEFAULT_BINS, HISTOGRAM_PAD};
pub use hutchinson::{hutchinson_moment, MIN_PROBES};
pub use structured::StructuredOperator;
pub use wasserstein::{w2_distance, w2_sorted, QUANTILE_OVERSAMPLE};

use serde::{Deserialize, Serialize};

use crate::ensemble::PatternedMatrix;
use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MomentPath {
    EigenPowerSum,
    DensePowerTrace,
}

pub fn eigenvalues_symmetric(m: &PatternedMatrix) -> Result<Vec<f64>> {
    symmetric_eigenvalues(m.entries(), m.n())
}

/// `(1/n) Tr M^h`; `h = 0` gives 1.
pub fn empirical_moment(m: &PatternedMatrix, h: usize, path: MomentPath) -> Result<f64> {
    if h == 0 {
        return Ok(1.0);
    }
    let n = m.n();
    match path {
        MomentPath::EigenPowerSum => {
            let ev = eigenvalues_symmetric(m)?;
            Ok(power_moments(&ev, h)[h])
        }
        MomentPath::DensePowerTrace => Ok(dense_power_trace(m.entries(), n, h) / n as f64),
    }
}

fn matmul(a: &[f64], b: &[f64], n: usize) -> Vec<f64> {
    let mut c = vec![0.0; n * n];
    for i in 0..n {
        let crow = &mut c[i * n..(i + 1) * n];
        for k in 0..n {
            let aik = a[i * n + k];
            if aik == 0.0 {
                continue;
            }
            for (cv, bv) in crow.iter_mut().zip(&b[k * n..(k + 1) * n]) {
                *cv += aik * bv;
            }
        }
    }
    c
}

/// `Tr A^h` for symmetric `A`, as `sum_ij (A^a)_ij (A^b)_ij` with `a = floor(h/2)`.
pub fn dense_power_trace(a: &[f64], n: usize, h: usize) -> f64 {
    if h == 0 {
        return n as f64;
    }
    if h == 1 {
        return (0..n).map(|i| a[i * n + i]).sum();
    }
    let half = h / 2;
    let mut low = a.to_vec();
    for _ in 1..half {
        low = matmul(&low, a, n);
    }
    let high = if h - half == half { low.clone() } else { matmul(&low, a, n) };
    low.iter().zip(&high).map(|(x, y)| x * y).sum()
}

/// Copy of `m` with its diagonal set to zero, marked as derived.
pub fn zero_diagonal(m: &PatternedMatrix) -> PatternedMatrix {
    let n = m.n();
    let mut entries = m.entries().to_vec();
    for i in 0..n {
        entries[i * n + i] = 0.0;
    }
    PatternedMatrix::from_parts(m.kind(), n, entries, m.generator().clone(), m.scale(), true)
}

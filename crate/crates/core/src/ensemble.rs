//! Moving-average entry sequences and the symmetric Toeplitz / Hankel
//! matrices assembled from them.
//!
//! Indices are two-sided integers. A size-`n` realization draws `X_k` on
//! `[-(n-1)-m, (n-1)+m]` and forms `Y_j = sum_r c_r X_{j+r}` on
//! `[-(n-1), n-1]`, which is the support both matrix kinds need.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

/// Base distribution of the i.i.d. `X_k`. All variants have mean 0 and variance 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EntryDistribution {
    #[serde(rename = "normal")]
    StandardNormal,
    #[serde(rename = "rademacher")]
    Rademacher,
    /// Uniform on `[-sqrt(3), sqrt(3)]`.
    #[serde(rename = "uniform")]
    UniformSym,
}

impl EntryDistribution {
    pub const ALL: [EntryDistribution; 3] = [
        EntryDistribution::StandardNormal,
        EntryDistribution::Rademacher,
        EntryDistribution::UniformSym,
    ];

    #[inline]
    pub fn sample<R: Rng + ?Sized>(self, rng: &mut R) -> f64 {
        match self {
            EntryDistribution::StandardNormal => rng.sample(StandardNormal),
            EntryDistribution::Rademacher => {
                if rng.random::<bool>() {
                    1.0
                } else {
                    -1.0
                }
            }
            EntryDistribution::UniformSym => (2.0 * rng.random::<f64>() - 1.0) * 3f64.sqrt(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            EntryDistribution::StandardNormal => "normal",
            EntryDistribution::Rademacher => "rademacher",
            EntryDistribution::UniformSym => "uniform",
        }
    }
}

impl fmt::Display for EntryDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EntryDistribution {
    type Err = LabError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "normal" | "gaussian" | "standard-normal" => Ok(EntryDistribution::StandardNormal),
            "rademacher" | "sign" => Ok(EntryDistribution::Rademacher),
            "uniform" | "uniform-sym" => Ok(EntryDistribution::UniformSym),
            other => Err(LabError::invalid(format!("unknown distribution `{other}`"))),
        }
    }
}

/// The entry model `Y_j = sum_{r=-m}^{m} c_r X_{j+r}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MovingAverageProcess {
    m: usize,
    /// `weights[r + m] = c_r`.
    weights: Vec<f64>,
    dist: EntryDistribution,
    seed: u64,
}

impl MovingAverageProcess {
    /// Unit weights `c_r = 1`.
    pub fn new(m: usize, dist: EntryDistribution, seed: u64) -> Self {
        MovingAverageProcess {
            m,
            weights: vec![1.0; 2 * m + 1],
            dist,
            seed,
        }
    }

    pub fn with_weights(
        m: usize,
        weights: Vec<f64>,
        dist: EntryDistribution,
        seed: u64,
    ) -> Result<Self> {
        if weights.len() != 2 * m + 1 {
            return Err(LabError::invalid(format!(
                "window half-width {m} needs {} weights, got {}",
                2 * m + 1,
                weights.len()
            )));
        }
        if weights.iter().any(|w| !w.is_finite()) {
            return Err(LabError::invalid("weights must be finite"));
        }
        Ok(MovingAverageProcess {
            m,
            weights,
            dist,
            seed,
        })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn dist(&self) -> EntryDistribution {
        self.dist
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn has_unit_weights(&self) -> bool {
        self.weights.iter().all(|&w| w == 1.0)
    }

    /// Same process with a different seed.
    pub fn reseeded(&self, seed: u64) -> Self {
        MovingAverageProcess {
            seed,
            ..self.clone()
        }
    }

    /// Raw window `[-(n-1)-m, (n-1)+m]` needed for a size-`n` matrix of either kind.
    pub fn raw_window(&self, n: usize) -> (i64, i64) {
        let reach = n as i64 - 1 + self.m as i64;
        (-reach, reach)
    }

    /// Draws the raw noise and returns `Y_j` for `j` in `[-(n-1), n-1]`.
    pub fn realize(&self, n: usize) -> Result<EntrySequence> {
        if n == 0 {
            return Err(LabError::invalid("matrix size must be positive"));
        }
        let (lo, hi) = self.raw_window(n);
        let raw = sample_raw(self, lo, hi)?;
        let half = n as i64 - 1;
        moving_average(&raw, self.m, &self.weights, -half, half)
    }
}

/// Real values on a contiguous integer index window `[lo, hi]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntrySequence {
    lo: i64,
    values: Vec<f64>,
}

impl EntrySequence {
    pub fn new(lo: i64, values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(LabError::invalid("entry sequence must be nonempty"));
        }
        Ok(EntrySequence { lo, values })
    }

    pub fn lo(&self) -> i64 {
        self.lo
    }

    pub fn hi(&self) -> i64 {
        self.lo + self.values.len() as i64 - 1
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    #[inline]
    pub fn get(&self, j: i64) -> Option<f64> {
        let k = j - self.lo;
        if k < 0 {
            return None;
        }
        self.values.get(k as usize).copied()
    }

    pub fn at(&self, j: i64) -> Result<f64> {
        self.get(j).ok_or(LabError::MissingSupport {
            index: j,
            lo: self.lo,
            hi: self.hi(),
        })
    }

    pub fn require(&self, lo: i64, hi: i64) -> Result<()> {
        if lo < self.lo {
            return Err(LabError::MissingSupport {
                index: lo,
                lo: self.lo,
                hi: self.hi(),
            });
        }
        if hi > self.hi() {
            return Err(LabError::MissingSupport {
                index: hi,
                lo: self.lo,
                hi: self.hi(),
            });
        }
        Ok(())
    }

    /// Copy restricted to `[lo, hi]`.
    pub fn window(&self, lo: i64, hi: i64) -> Result<EntrySequence> {
        if lo > hi {
            return Err(LabError::InvalidRange { lo, hi });
        }
        self.require(lo, hi)?;
        let start = (lo - self.lo) as usize;
        let end = (hi - self.lo) as usize;
        Ok(EntrySequence {
            lo,
            values: self.values[start..=end].to_vec(),
        })
    }
}

/// I.i.d. draws `X_lo..X_hi` from the process distribution, in index order.
pub fn sample_raw(process: &MovingAverageProcess, lo: i64, hi: i64) -> Result<EntrySequence> {
    if lo > hi {
        return Err(LabError::InvalidRange { lo, hi });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(process.seed);
    let len = (hi - lo + 1) as usize;
    let values = (0..len).map(|_| process.dist.sample(&mut rng)).collect();
    Ok(EntrySequence { lo, values })
}

/// `Y_j = sum_{r=-m}^{m} weights[r+m] * X_{j+r}` for `j` in `[lo, hi]`.
pub fn moving_average(
    raw: &EntrySequence,
    m: usize,
    weights: &[f64],
    lo: i64,
    hi: i64,
) -> Result<EntrySequence> {
    if weights.len() != 2 * m + 1 {
        return Err(LabError::invalid(format!(
            "window half-width {m} needs {} weights, got {}",
            2 * m + 1,
            weights.len()
        )));
    }
    if lo > hi {
        return Err(LabError::InvalidRange { lo, hi });
    }
    let m = m as i64;
    raw.require(lo - m, hi + m)?;
    let x = &raw.values;
    let base = lo - m - raw.lo;
    let values = (0..=(hi - lo))
        .map(|k| {
            let start = (base + k) as usize;
            x[start..start + weights.len()]
                .iter()
                .zip(weights)
                .map(|(xv, w)| w * xv)
                .sum()
        })
        .collect();
    Ok(EntrySequence { lo, values })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MatrixKind {
    #[serde(rename = "toeplitz")]
    Toeplitz,
    #[serde(rename = "hankel")]
    Hankel,
}

impl MatrixKind {
    pub fn name(self) -> &'static str {
        match self {
            MatrixKind::Toeplitz => "toeplitz",
            MatrixKind::Hankel => "hankel",
        }
    }

    /// Index window of `Y` a size-`n` matrix reads.
    pub fn support(self, n: usize) -> (i64, i64) {
        let top = n as i64 - 1;
        match self {
            MatrixKind::Toeplitz => (0, top),
            MatrixKind::Hankel => (-top, top),
        }
    }

    /// Unscaled generator index of 0-based cell `(i, j)`.
    #[inline]
    pub fn index_of(self, n: usize, i: usize, j: usize) -> i64 {
        match self {
            MatrixKind::Toeplitz => (i as i64 - j as i64).abs(),
            MatrixKind::Hankel => n as i64 - 1 - i as i64 - j as i64,
        }
    }
}

impl fmt::Display for MatrixKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MatrixKind {
    type Err = LabError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "toeplitz" | "t" => Ok(MatrixKind::Toeplitz),
            "hankel" | "h" => Ok(MatrixKind::Hankel),
            other => Err(LabError::invalid(format!("unknown matrix kind `{other}`"))),
        }
    }
}

/// A realized `n x n` symmetric Toeplitz or Hankel matrix, dense row-major,
/// with entries `Y_index / sqrt(n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PatternedMatrix {
    kind: MatrixKind,
    n: usize,
    entries: Vec<f64>,
    generator: EntrySequence,
    scale: f64,
    diagonal_zeroed: bool,
}

impl PatternedMatrix {
    fn assemble(kind: MatrixKind, y: &EntrySequence, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(LabError::invalid("matrix size must be positive"));
        }
        let (lo, hi) = kind.support(n);
        let generator = y.window(lo, hi)?;
        let scale = 1.0 / (n as f64).sqrt();
        let mut entries = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                let v = generator.values[(kind.index_of(n, i, j) - lo) as usize] * scale;
                entries[i * n + j] = v;
                entries[j * n + i] = v;
            }
        }
        Ok(PatternedMatrix {
            kind,
            n,
            entries,
            generator,
            scale,
            diagonal_zeroed: false,
        })
    }

    /// Builds from an arbitrary dense symmetric matrix, keeping `kind` only as a label.
    pub(crate) fn from_parts(
        kind: MatrixKind,
        n: usize,
        entries: Vec<f64>,
        generator: EntrySequence,
        scale: f64,
        diagonal_zeroed: bool,
    ) -> Self {
        PatternedMatrix {
            kind,
            n,
            entries,
            generator,
            scale,
            diagonal_zeroed,
        }
    }

    pub fn kind(&self) -> MatrixKind {
        self.kind
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * self.n..(i + 1) * self.n]
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    /// The window of `Y` this matrix was built from (unscaled).
    pub fn generator(&self) -> &EntrySequence {
        &self.generator
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// True for matrices derived from a pattern (e.g. by zeroing the
    /// diagonal); such matrices need not keep the Toeplitz/Hankel structure.
    pub fn is_derived(&self) -> bool {
        self.diagonal_zeroed
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }
}

/// `M[i][j] = Y_{|i-j|} / sqrt(n)`; needs `Y` on `[0, n-1]`.
pub fn build_toeplitz(y: &EntrySequence, n: usize) -> Result<PatternedMatrix> {
    PatternedMatrix::assemble(MatrixKind::Toeplitz, y, n)
}

/// `M[i][j] = Y_{n-(i+j)+1} / sqrt(n)` for 1-based `i, j`; needs `Y` on
/// `[-(n-1), n-1]`, with `Y_j` and `Y_{-j}` distinct.
pub fn build_hankel(y: &EntrySequence, n: usize) -> Result<PatternedMatrix> {
    PatternedMatrix::assemble(MatrixKind::Hankel, y, n)
}

pub fn build(kind: MatrixKind, y: &EntrySequence, n: usize) -> Result<PatternedMatrix> {
    PatternedMatrix::assemble(kind, y, n)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seq(lo: i64, v: &[f64]) -> EntrySequence {
        EntrySequence::new(lo, v.to_vec()).unwrap()
    }

    #[test]
    fn rademacher_single_draw_is_a_sign() {
        let p = MovingAverageProcess::new(0, EntryDistribution::Rademacher, 99);
        let x = sample_raw(&p, 0, 0).unwrap();
        assert_eq!(x.len(), 1);
        assert!(x.values()[0] == 1.0 || x.values()[0] == -1.0);
    }

    #[test]
    fn sampling_is_deterministic_in_seed() {
        for dist in EntryDistribution::ALL {
            let p = MovingAverageProcess::new(2, dist, 12345);
            let a = sample_raw(&p, -50, 50).unwrap();
            let b = sample_raw(&p, -50, 50).unwrap();
            assert_eq!(a, b);
            let c = sample_raw(&p.reseeded(12346), -50, 50).unwrap();
            assert_ne!(a, c);
        }
    }

    #[test]
    fn reversed_range_is_rejected() {
        let p = MovingAverageProcess::new(0, EntryDistribution::StandardNormal, 1);
        assert!(matches!(
            sample_raw(&p, 3, 2),
            Err(LabError::InvalidRange { lo: 3, hi: 2 })
        ));
    }

    #[test]
    fn normal_variance_over_a_million_draws() {
        let p = MovingAverageProcess::new(0, EntryDistribution::StandardNormal, 2024);
        let x = sample_raw(&p, 0, 999_999).unwrap();
        let n = x.len() as f64;
        let mean = x.values().iter().sum::<f64>() / n;
        let var = x.values().iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
        assert!((0.99..=1.01).contains(&var), "variance {var}");
    }

    #[test]
    fn identity_window_copies_input() {
        let x = seq(-2, &[0.5, -1.0, 2.0, 3.5]);
        let y = moving_average(&x, 0, &[1.0], -2, 1).unwrap();
        assert_eq!(y, x);
    }

    #[test]
    fn three_term_window_by_hand() {
        let x = seq(0, &[1.0, 2.0, 3.0, 4.0, 5.0]);
        let y = moving_average(&x, 1, &[1.0, 1.0, 1.0], 1, 3).unwrap();
        assert_eq!(y.lo(), 1);
        assert_eq!(y.values(), &[6.0, 9.0, 12.0]);
    }

    #[test]
    fn weighted_window_orders_coefficients_from_minus_m() {
        let x = seq(0, &[1.0, 10.0, 100.0]);
        // c_{-1} = 1, c_0 = 2, c_1 = 3  =>  Y_1 = X_0 + 2 X_1 + 3 X_2
        let y = moving_average(&x, 1, &[1.0, 2.0, 3.0], 1, 1).unwrap();
        assert_eq!(y.values(), &[321.0]);
    }

    #[test]
    fn zero_input_gives_zero_output() {
        let x = seq(-5, &[0.0; 11]);
        let y = moving_average(&x, 2, &[0.3, -1.0, 4.0, 2.0, 7.0], -3, 3).unwrap();
        assert!(y.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn insufficient_coverage_is_missing_support() {
        let x = seq(0, &[1.0, 2.0, 3.0]);
        assert!(matches!(
            moving_average(&x, 1, &[1.0; 3], 0, 1),
            Err(LabError::MissingSupport { index: -1, .. })
        ));
        assert!(moving_average(&x, 1, &[1.0; 2], 1, 1).is_err());
    }

    #[test]
    fn toeplitz_small_cases() {
        let m1 = build_toeplitz(&seq(0, &[4.0]), 1).unwrap();
        assert_eq!(m1.entries(), &[4.0]);

        let (a, b) = (1.5, -0.25);
        let m2 = build_toeplitz(&seq(0, &[a, b]), 2).unwrap();
        let s = 1.0 / 2f64.sqrt();
        assert_eq!(m2.entries(), &[a * s, b * s, b * s, a * s]);

        let m3 = build_toeplitz(&seq(0, &[1.0, 2.0, 3.0]), 3).unwrap();
        let s = 1.0 / 3f64.sqrt();
        let expect: Vec<f64> = [1.0, 2.0, 3.0, 2.0, 1.0, 2.0, 3.0, 2.0, 1.0]
            .iter()
            .map(|v| v * s)
            .collect();
        assert_eq!(m3.entries(), expect.as_slice());
    }

    #[test]
    fn hankel_small_cases() {
        let m1 = build_hankel(&seq(0, &[4.0]), 1).unwrap();
        assert_eq!(m1.entries(), &[4.0]);

        let (u, v, w) = (1.0, 2.0, 3.0);
        let m2 = build_hankel(&seq(-1, &[u, v, w]), 2).unwrap();
        let s = 1.0 / 2f64.sqrt();
        assert_eq!(m2.entries(), &[w * s, v * s, v * s, u * s]);

        let c = 2.5;
        let m4 = build_hankel(&seq(-3, &[c; 7]), 4).unwrap();
        assert!(m4.entries().iter().all(|&e| e == c / 2.0));
    }

    #[test]
    fn builders_report_missing_support() {
        let y = seq(0, &[1.0, 2.0]);
        assert!(matches!(
            build_toeplitz(&y, 3),
            Err(LabError::MissingSupport { .. })
        ));
        assert!(matches!(
            build_hankel(&y, 2),
            Err(LabError::MissingSupport { .. })
        ));
    }

    #[test]
    fn unit_weight_variance_is_window_length() {
        let m = 2;
        let p = MovingAverageProcess::new(m, EntryDistribution::UniformSym, 5);
        let raw = sample_raw(&p, 0, 200_003).unwrap();
        let y = moving_average(&raw, m, p.weights(), 2, 200_001).unwrap();
        let n = y.len() as f64;
        let mean = y.values().iter().sum::<f64>() / n;
        let var = y.values().iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
        // Var(Y) = 5. For uniform X the excess kurtosis is -6/5, so
        // sum_k Cov(Y_0^2, Y_k^2) = 2 * sum_k (5 - |k|)^2 - 1.2 * sum_k (5 - |k|) = 170 - 30.
        let se = (140.0 / n).sqrt();
        assert!((var - 5.0).abs() < 5.0 * se, "variance {var}, se {se}");
    }

    #[test]
    fn weight_count_is_checked() {
        assert!(
            MovingAverageProcess::with_weights(1, vec![1.0, 2.0], EntryDistribution::Rademacher, 0)
                .is_err()
        );
        let p = MovingAverageProcess::with_weights(
            1,
            vec![1.0, 2.0, 1.0],
            EntryDistribution::Rademacher,
            0,
        )
        .unwrap();
        assert!(!p.has_unit_weights());
    }
}

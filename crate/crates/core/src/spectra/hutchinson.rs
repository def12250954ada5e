use rand::Rng;
use rayon::prelude::*;

use super::structured::StructuredOperator;
use crate::error::{LabError, Result};
use crate::seed::{self, domain};

pub const MIN_PROBES: usize = 8;

/// Stochastic estimate of `(1/n) Tr M^h` from Rademacher probes `z`, using
/// `z^T M^h z = <M^a z, M^b z>`. Returns `(estimate, std_error)`.
pub fn hutchinson_moment(
    op: &StructuredOperator,
    h: usize,
    probes: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    if probes < MIN_PROBES {
        return Err(LabError::invalid(format!(
            "need at least {MIN_PROBES} probes, got {probes}"
        )));
    }
    if h == 0 {
        return Ok((1.0, 0.0));
    }
    let n = op.n();
    let a = h / 2;
    let b = h - a;
    let samples: Vec<f64> = (0..probes)
        .into_par_iter()
        .map(|k| -> Result<f64> {
            let mut rng = seed::stream(seed, &[domain::HUTCHINSON, h as u64, k as u64]);
            let z: Vec<f64> = (0..n)
                .map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 })
                .collect();
            let mut left = z.clone();
            let mut right = z;
            for step in 0..b {
                right = op.fast_matvec(&right)?;
                if step + 1 == a {
                    left = right.clone();
                }
            }
            Ok(left.iter().zip(&right).map(|(x, y)| x * y).sum::<f64>() / n as f64)
        })
        .collect::<Result<_>>()?;
    let count = probes as f64;
    let mean = samples.iter().sum::<f64>() / count;
    let var = samples.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (count - 1.0);
    Ok((mean, (var / count).sqrt()))
}

//! Growth diagnostics on a finite prefix of even moments.

use serde::{Deserialize, Serialize};

use super::MomentReport;
use crate::error::{LabError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrowthRow {
    pub p: usize,
    pub beta: f64,
    /// `beta_{2p}^{1/(2p)} / p`
    pub riesz_value: f64,
    /// `beta_{2p}^{1/p}`
    pub support_value: f64,
    /// Delta-method standard error of `support_value`.
    pub support_se: f64,
}

/// `2 ((2p)! / (2^p p!))^{1/(2p)} (2m+1) / p`.
pub fn riesz_upper_bound(p: usize, m: usize) -> f64 {
    let double_factorial: f64 = (1..=p).map(|k| (2 * k - 1) as f64).product();
    2.0 * double_factorial.powf(1.0 / (2 * p) as f64) * (2 * m + 1) as f64 / p as f64
}

/// Diagnostics from `(beta_{2p}, std_error)` for `p = 1, 2, ...`.
pub fn growth_from_even_moments(betas: &[(f64, f64)]) -> Result<Vec<GrowthRow>> {
    if betas.len() < 3 {
        return Err(LabError::InvalidInput(format!(
            "growth diagnostics need at least three even moments, got {}",
            betas.len()
        )));
    }
    betas
        .iter()
        .enumerate()
        .map(|(k, &(beta, se))| {
            let p = k + 1;
            if !(beta > 0.0) {
                return Err(LabError::InvalidInput(format!(
                    "beta_{} = {beta} is not positive",
                    2 * p
                )));
            }
            let pf = p as f64;
            let support_value = beta.powf(1.0 / pf);
            Ok(GrowthRow {
                p,
                beta,
                riesz_value: beta.powf(1.0 / (2.0 * pf)) / pf,
                support_value,
                support_se: support_value * se / (pf * beta),
            })
        })
        .collect()
}

pub fn growth_diagnostics(report: &MomentReport) -> Result<Vec<GrowthRow>> {
    let betas: Vec<(f64, f64)> = report
        .moments
        .iter()
        .filter(|r| r.h % 2 == 0)
        .map(|r| (r.beta, r.std_error))
        .collect();
    growth_from_even_moments(&betas)
}

/// For each consecutive pair, `(next - prev) / combined_se` (infinite when both errors vanish).
pub fn increase_significance(rows: &[GrowthRow]) -> Vec<f64> {
    rows.windows(2)
        .map(|w| {
            let gap = w[1].support_value - w[0].support_value;
            let se = (w[0].support_se.powi(2) + w[1].support_se.powi(2)).sqrt();
            if se > 0.0 {
                gap / se
            } else if gap > 0.0 {
                f64::INFINITY
            } else {
                f64::NEG_INFINITY
            }
        })
        .collect()
}

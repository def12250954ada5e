//! Limiting moment sequences `beta_h = #G_{2p,m} * gamma(p)` and their growth.

mod gamma;
mod growth;

pub use gamma::{
    gamma, gamma_hankel, gamma_toeplitz, gamma_upper_bound, GammaEstimate, GammaMethod,
    Integrator, MIN_GRID_SIDE, MIN_MC_SAMPLES,
};
pub use growth::{
    growth_diagnostics, growth_from_even_moments, increase_significance, riesz_upper_bound,
    GrowthRow,
};

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use crate::combinatorics::{card_g_h, card_g_t, to_f64};
use crate::ensemble::{MatrixKind, MovingAverageProcess};
use crate::error::{LabError, Result};

pub const DEFAULT_MAX_P: usize = 6;

/// Default Monte Carlo samples per pairing at half-order `p`.
pub fn default_mc_samples(p: usize) -> u64 {
    match p {
        0..=3 => 1_000_000,
        4 | 5 => 100_000,
        _ => 10_000,
    }
}

/// Default midpoint-grid side at half-order `p`.
pub fn default_grid_side(p: usize) -> usize {
    match p {
        0 | 1 => 400,
        2 => 200,
        3 => 48,
        4 => 20,
        _ => MIN_GRID_SIDE,
    }
}

/// How the `gamma(p)` factors of a moment sequence are evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GammaPlan {
    pub method: GammaMethod,
    /// Samples per pairing (Monte Carlo) or grid side; `None` uses the per-`p` defaults.
    pub budget: Option<u64>,
    pub seed: u64,
    pub max_p: usize,
}

impl GammaPlan {
    pub fn monte_carlo(seed: u64) -> Self {
        GammaPlan {
            method: GammaMethod::MonteCarlo,
            budget: None,
            seed,
            max_p: DEFAULT_MAX_P,
        }
    }

    pub fn grid() -> Self {
        GammaPlan {
            method: GammaMethod::RiemannGrid,
            budget: None,
            seed: 0,
            max_p: DEFAULT_MAX_P,
        }
    }

    pub fn with_budget(mut self, budget: u64) -> Self {
        self.budget = Some(budget);
        self
    }

    pub fn integrator(&self, p: usize) -> Integrator {
        match self.method {
            GammaMethod::MonteCarlo => Integrator::MonteCarlo {
                samples: self.budget.unwrap_or_else(|| default_mc_samples(p)),
                seed: self.seed,
            },
            GammaMethod::RiemannGrid => Integrator::RiemannGrid {
                side: self
                    .budget
                    .map(|b| b as usize)
                    .unwrap_or_else(|| default_grid_side(p)),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MomentRow {
    pub h: usize,
    pub beta: f64,
    pub std_error: f64,
    /// `#G_{2p,m}` for even `h`; `None` for odd rows.
    pub cardinality: Option<BigUint>,
    pub gamma: Option<GammaEstimate>,
}

impl MomentRow {
    /// Bias bound of the grid estimate scaled by the cardinality; 0 otherwise.
    pub fn bias_bound(&self) -> f64 {
        match (&self.cardinality, &self.gamma) {
            (Some(c), Some(g)) => to_f64(c) * g.bias_bound,
            _ => 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MomentReport {
    pub kind: MatrixKind,
    pub m: usize,
    pub moments: Vec<MomentRow>,
}

impl MomentReport {
    pub fn row(&self, h: usize) -> Option<&MomentRow> {
        self.moments.iter().find(|r| r.h == h)
    }

    pub fn beta(&self, h: usize) -> Option<f64> {
        self.row(h).map(|r| r.beta)
    }

    pub fn h_max(&self) -> usize {
        self.moments.last().map_or(0, |r| r.h)
    }
}

pub fn cardinality(kind: MatrixKind, p: usize, m: usize) -> Result<BigUint> {
    match kind {
        MatrixKind::Toeplitz => card_g_t(p, m),
        MatrixKind::Hankel => card_g_h(p, m),
    }
}

/// Theoretical `beta_1..beta_{h_max}` for unit weights.
pub fn beta_sequence(
    kind: MatrixKind,
    m: usize,
    h_max: usize,
    plan: &GammaPlan,
) -> Result<MomentReport> {
    if h_max < 2 {
        return Err(LabError::invalid(format!("h_max must be at least 2, got {h_max}")));
    }
    if h_max / 2 > plan.max_p {
        return Err(LabError::invalid(format!(
            "h_max = {h_max} needs gamma up to p = {}, above the cap {}",
            h_max / 2,
            plan.max_p
        )));
    }
    let mut moments = Vec::with_capacity(h_max);
    for h in 1..=h_max {
        if h % 2 == 1 {
            moments.push(MomentRow {
                h,
                beta: 0.0,
                std_error: 0.0,
                cardinality: None,
                gamma: None,
            });
            continue;
        }
        let p = h / 2;
        let card = cardinality(kind, p, m)?;
        let g = gamma(kind, p, plan.integrator(p))?;
        let c = to_f64(&card);
        moments.push(MomentRow {
            h,
            beta: c * g.value,
            std_error: c * g.std_error,
            cardinality: Some(card),
            gamma: Some(g),
        });
    }
    Ok(MomentReport { kind, m, moments })
}

/// As [`beta_sequence`] but for a concrete process; refuses non-unit weights.
pub fn beta_sequence_for(
    process: &MovingAverageProcess,
    kind: MatrixKind,
    h_max: usize,
    plan: &GammaPlan,
) -> Result<MomentReport> {
    ensure_unit_weights(process)?;
    beta_sequence(kind, process.m(), h_max, plan)
}

pub fn ensure_unit_weights(process: &MovingAverageProcess) -> Result<()> {
    if process.has_unit_weights() {
        Ok(())
    } else {
        Err(LabError::UnsupportedTheory(
            "limiting moments are only available for unit weights".into(),
        ))
    }
}

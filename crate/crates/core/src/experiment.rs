//! Experiment configuration and the drivers behind each command.

use std::path::PathBuf;

use num_bigint::BigUint;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::combinatorics::{card_g_bruteforce, card_g_h, card_g_t, DEFAULT_ENUMERATION_BUDGET};
use crate::ensemble::{build, EntryDistribution, MatrixKind, MovingAverageProcess};
use crate::error::{LabError, Result};
use crate::moments::{beta_sequence, ensure_unit_weights, GammaMethod, GammaPlan, MomentReport, DEFAULT_MAX_P};
use crate::seed::{derive_seed, domain};
use crate::spectra::{
    esd, power_moments, symmetric_eigenvalues, w2_sorted, zero_diagonal, EsdSummary,
    StructuredOperator, DEFAULT_BINS,
};
use crate::trace_validate::{default_grid, run_suite, FormulaOptions, ValidationReport, DEFAULT_VALIDATE_BUDGET};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SimMethod {
    /// Dense eigendecomposition: spectra, histograms and W2.
    Dense,
    /// FFT trace moments only.
    Fast,
}

impl std::str::FromStr for SimMethod {
    type Err = LabError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dense" => Ok(SimMethod::Dense),
            "fast" => Ok(SimMethod::Fast),
            other => Err(LabError::invalid(format!("unknown method '{other}' (dense | fast)"))),
        }
    }
}

/// Every command reads the fields it needs; the rest keep their defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: MatrixKind,
    pub n: usize,
    pub m: usize,
    pub weights: Option<Vec<f64>>,
    pub dist: EntryDistribution,
    pub trials: usize,
    pub h_max: usize,
    pub seed: u64,
    pub method: SimMethod,
    pub out: PathBuf,
    /// Gamma samples per pairing or grid side (moments, theory columns), or
    /// enumeration budget (cardinality, validate).
    pub budget: Option<u64>,
    pub gamma_method: GammaMethod,
    pub theory: bool,
    pub bins: usize,
    pub n_list: Vec<usize>,
    pub p_max: usize,
    pub m_max: usize,
    pub bruteforce: bool,
    pub seeds: Vec<u64>,
    pub mutate: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            kind: MatrixKind::Toeplitz,
            n: 500,
            m: 0,
            weights: None,
            dist: EntryDistribution::StandardNormal,
            trials: 10,
            h_max: 4,
            seed: 0,
            method: SimMethod::Dense,
            out: PathBuf::from("."),
            budget: None,
            gamma_method: GammaMethod::MonteCarlo,
            theory: true,
            bins: DEFAULT_BINS,
            n_list: vec![250, 500, 1000, 2000],
            p_max: 4,
            m_max: 3,
            bruteforce: false,
            seeds: (1..=20).collect(),
            mutate: false,
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| LabError::Config(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// The config as embedded in data files: everything except the output location.
    pub fn provenance(&self) -> serde_json::Value {
        let mut v = serde_json::to_value(self).expect("config serializes");
        if let Some(map) = v.as_object_mut() {
            map.remove("out");
        }
        v
    }

    pub fn check(&self) -> Result<()> {
        if self.trials < 1 {
            return Err(LabError::invalid("trials must be at least 1"));
        }
        if self.n < 1 {
            return Err(LabError::invalid("n must be at least 1"));
        }
        if self.h_max < 2 {
            return Err(LabError::invalid("h_max must be at least 2"));
        }
        if self.bins < 1 {
            return Err(LabError::invalid("bins must be at least 1"));
        }
        if let Some(w) = &self.weights {
            if w.len() != 2 * self.m + 1 {
                return Err(LabError::invalid(format!(
                    "weights need 2m+1 = {} values, got {}",
                    2 * self.m + 1,
                    w.len()
                )));
            }
        }
        if self.n_list.contains(&0) {
            return Err(LabError::invalid("n_list entries must be positive"));
        }
        if self.n_list.windows(2).any(|w| w[0] >= w[1]) {
            return Err(LabError::invalid("n_list must be strictly ascending"));
        }
        Ok(())
    }

    pub fn process(&self, seed: u64) -> Result<MovingAverageProcess> {
        match &self.weights {
            Some(w) => MovingAverageProcess::with_weights(self.m, w.clone(), self.dist, seed),
            None => Ok(MovingAverageProcess::new(self.m, self.dist, seed)),
        }
    }

    pub fn gamma_plan(&self) -> GammaPlan {
        GammaPlan {
            method: self.gamma_method,
            budget: self.budget,
            seed: self.seed,
            max_p: DEFAULT_MAX_P,
        }
    }

    fn enumeration_budget(&self, default: u128) -> u128 {
        self.budget.map_or(default, u128::from)
    }
}

/// One simulated matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialOutcome {
    /// `(1/n) Tr M^h` for `h = 1..=h_max`.
    pub moments: Vec<f64>,
    pub eigenvalues: Option<Vec<f64>>,
    /// `W2(esd(M), esd(M with zero diagonal))^2`, dense method only.
    pub w2_sq: Option<f64>,
    /// `(1/n) sum diag^2`.
    pub diag_bound: f64,
}

/// Seed of trial `t` at size `n`.
pub fn trial_seed(root: u64, n: usize, t: usize) -> u64 {
    derive_seed(root, &[domain::TRIAL, n as u64, t as u64])
}

pub fn run_trial(cfg: &ExperimentConfig, n: usize, t: usize) -> Result<TrialOutcome> {
    let process = cfg.process(trial_seed(cfg.seed, n, t))?;
    let y = process.realize(n)?;
    let mat = build(cfg.kind, &y, n)?;
    let diag_bound = mat.diagonal().iter().map(|d| d * d).sum::<f64>() / n as f64;
    match cfg.method {
        SimMethod::Fast => {
            let op = StructuredOperator::new(&mat)?;
            Ok(TrialOutcome {
                moments: op.trace_moments(cfg.h_max)?,
                eigenvalues: None,
                w2_sq: None,
                diag_bound,
            })
        }
        SimMethod::Dense => {
            let ev = symmetric_eigenvalues(mat.entries(), n)?;
            let zeroed = zero_diagonal(&mat);
            let mut ez = symmetric_eigenvalues(zeroed.entries(), n)?;
            ez.sort_by(f64::total_cmp);
            let w2 = w2_sorted(&ev, &ez);
            Ok(TrialOutcome {
                moments: power_moments(&ev, cfg.h_max)[1..].to_vec(),
                eigenvalues: Some(ev),
                w2_sq: Some(w2 * w2),
                diag_bound,
            })
        }
    }
}

pub fn run_trials(cfg: &ExperimentConfig, n: usize) -> Result<Vec<TrialOutcome>> {
    (0..cfg.trials)
        .into_par_iter()
        .map(|t| run_trial(cfg, n, t))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub n: usize,
    pub h: usize,
    pub trials: usize,
    pub mean: f64,
    /// Sample standard deviation across trials (0 for a single trial).
    pub std: f64,
    pub beta: f64,
    pub beta_se: f64,
    pub z: f64,
}

impl ConvergenceRow {
    pub fn variance(&self) -> f64 {
        self.std * self.std
    }
}

/// `(mean - beta) / sqrt(std^2 / trials + se^2)`; NaN when the denominator vanishes.
pub fn z_score(mean: f64, std: f64, trials: usize, beta: f64, se: f64) -> f64 {
    let denom = (std * std / trials as f64 + se * se).sqrt();
    if denom > 0.0 {
        (mean - beta) / denom
    } else {
        f64::NAN
    }
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let k = values.len() as f64;
    let mean = values.iter().sum::<f64>() / k;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (k - 1.0);
    (mean, var.sqrt())
}

pub fn convergence_rows(n: usize, trials: &[TrialOutcome], theory: Option<&MomentReport>) -> Vec<ConvergenceRow> {
    let h_max = trials.first().map_or(0, |t| t.moments.len());
    (1..=h_max)
        .map(|h| {
            let values: Vec<f64> = trials.iter().map(|t| t.moments[h - 1]).collect();
            let (mean, std) = mean_std(&values);
            let (beta, beta_se) = theory
                .and_then(|r| r.row(h))
                .map_or((f64::NAN, f64::NAN), |r| (r.beta, r.std_error));
            ConvergenceRow {
                n,
                h,
                trials: trials.len(),
                mean,
                std,
                beta,
                beta_se,
                z: z_score(mean, std, trials.len(), beta, beta_se),
            }
        })
        .collect()
}

/// Diagonal-zeroing diagnostic at one `n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct W2Row {
    pub n: usize,
    pub w2_sq_mean: f64,
    pub bound_mean: f64,
    /// `max_t (w2_sq - bound)`; nonpositive up to rounding when the bound holds.
    pub max_excess: f64,
    pub holds: bool,
}

pub const W2_SLACK: f64 = 1e-10;

pub fn w2_row(n: usize, trials: &[TrialOutcome]) -> Option<W2Row> {
    let pairs: Vec<(f64, f64)> = trials
        .iter()
        .map(|t| t.w2_sq.map(|w| (w, t.diag_bound)))
        .collect::<Option<_>>()?;
    let k = pairs.len() as f64;
    let max_excess = pairs.iter().map(|(w, b)| w - b).fold(f64::NEG_INFINITY, f64::max);
    Some(W2Row {
        n,
        w2_sq_mean: pairs.iter().map(|p| p.0).sum::<f64>() / k,
        bound_mean: pairs.iter().map(|p| p.1).sum::<f64>() / k,
        max_excess,
        holds: max_excess <= W2_SLACK,
    })
}

pub fn theory(cfg: &ExperimentConfig) -> Result<Option<MomentReport>> {
    if !cfg.theory {
        return Ok(None);
    }
    ensure_unit_weights(&cfg.process(cfg.seed)?)?;
    beta_sequence(cfg.kind, cfg.m, cfg.h_max, &cfg.gamma_plan()).map(Some)
}

#[derive(Debug, Clone)]
pub struct SimulationOutput {
    pub trials: Vec<TrialOutcome>,
    pub rows: Vec<ConvergenceRow>,
    pub w2: Option<W2Row>,
    /// ESD of all trials' eigenvalues pooled (dense method).
    pub pooled: Option<EsdSummary>,
    pub theory: Option<MomentReport>,
}

pub fn simulate(cfg: &ExperimentConfig) -> Result<SimulationOutput> {
    cfg.check()?;
    let theory = theory(cfg)?;
    let trials = run_trials(cfg, cfg.n)?;
    let rows = convergence_rows(cfg.n, &trials, theory.as_ref());
    let pooled = match cfg.method {
        SimMethod::Dense => {
            let all: Vec<f64> = trials
                .iter()
                .flat_map(|t| t.eigenvalues.iter().flatten().copied())
                .collect();
            Some(esd(&all, cfg.bins, cfg.h_max)?)
        }
        SimMethod::Fast => None,
    };
    Ok(SimulationOutput {
        w2: w2_row(cfg.n, &trials),
        trials,
        rows,
        pooled,
        theory,
    })
}

#[derive(Debug, Clone)]
pub struct ConvergenceOutput {
    pub rows: Vec<ConvergenceRow>,
    pub w2: Vec<Option<W2Row>>,
    pub theory: Option<MomentReport>,
}

impl ConvergenceOutput {
    pub fn rows_for(&self, h: usize) -> Vec<ConvergenceRow> {
        self.rows.iter().filter(|r| r.h == h).copied().collect()
    }
}

pub fn convergence(cfg: &ExperimentConfig) -> Result<ConvergenceOutput> {
    cfg.check()?;
    if cfg.n_list.is_empty() {
        return Err(LabError::invalid("n_list is empty"));
    }
    let theory = theory(cfg)?;
    let mut rows = Vec::new();
    let mut w2 = Vec::new();
    for &n in &cfg.n_list {
        let trials = run_trials(cfg, n)?;
        rows.extend(convergence_rows(n, &trials, theory.as_ref()));
        w2.push(w2_row(n, &trials));
    }
    Ok(ConvergenceOutput { rows, w2, theory })
}

/// Number of adjacent pairs where the across-trial variance fails to shrink.
pub fn variance_inversions(rows: &[ConvergenceRow]) -> usize {
    rows.windows(2).filter(|w| w[1].variance() >= w[0].variance()).count()
}

pub fn moments(cfg: &ExperimentConfig) -> Result<MomentReport> {
    if cfg.weights.is_some() {
        ensure_unit_weights(&cfg.process(cfg.seed)?)?;
    }
    beta_sequence(cfg.kind, cfg.m, cfg.h_max, &cfg.gamma_plan())
}

#[derive(Debug, Clone, PartialEq)]
pub struct CardinalityRow {
    pub p: usize,
    pub m: usize,
    pub toeplitz: BigUint,
    pub hankel: BigUint,
    pub brute_toeplitz: Option<BigUint>,
    pub brute_hankel: Option<BigUint>,
}

impl CardinalityRow {
    /// All available counts agree.
    pub fn matches(&self) -> bool {
        self.toeplitz == self.hankel
            && self.brute_toeplitz.as_ref().is_none_or(|b| *b == self.toeplitz)
            && self.brute_hankel.as_ref().is_none_or(|b| *b == self.hankel)
    }
}

pub fn cardinality_table(p_max: usize, m_max: usize, bruteforce: bool, budget: u128) -> Result<Vec<CardinalityRow>> {
    if p_max < 1 {
        return Err(LabError::invalid("p_max must be at least 1"));
    }
    let cells: Vec<(usize, usize)> = (1..=p_max).flat_map(|p| (0..=m_max).map(move |m| (p, m))).collect();
    cells
        .iter()
        .map(|&(p, m)| {
            let (brute_toeplitz, brute_hankel) = if bruteforce {
                (
                    Some(card_g_bruteforce(p, m, false, budget)?),
                    Some(card_g_bruteforce(p, m, true, budget)?),
                )
            } else {
                (None, None)
            };
            Ok(CardinalityRow {
                p,
                m,
                toeplitz: card_g_t(p, m)?,
                hankel: card_g_h(p, m)?,
                brute_toeplitz,
                brute_hankel,
            })
        })
        .collect()
}

pub fn cardinality(cfg: &ExperimentConfig) -> Result<Vec<CardinalityRow>> {
    cardinality_table(cfg.p_max, cfg.m_max, cfg.bruteforce, cfg.enumeration_budget(DEFAULT_ENUMERATION_BUDGET))
}

pub fn validate(cfg: &ExperimentConfig) -> Result<ValidationReport> {
    if cfg.seeds.is_empty() {
        return Err(LabError::invalid("no validation seeds"));
    }
    let opts = FormulaOptions {
        budget: cfg.enumeration_budget(DEFAULT_VALIDATE_BUDGET),
        mutate: cfg.mutate,
    };
    run_suite(&default_grid(), &cfg.seeds, opts)
}

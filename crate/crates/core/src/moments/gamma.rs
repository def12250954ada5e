//! The partition-indexed volumes `gamma_T(p)` and `gamma_H(p)`.
//!
//! For a pairing `pi` of `{1..2p}` the integrand is the indicator that every
//! partial sum `z_0 + sum_{l <= s} c_l z_{pi(l)}` lies in `[0, 1]`, over
//! `(z_0, z_1..z_p)` in `[0,1] x [-1,1]^p`. Toeplitz uses every pairing with
//! `c_l = eps_pi(l)`. Hankel uses the odd-even pairings with `c_l = -(-1)^l`,
//! which is the sign the alternating Hankel index recursion produces when the
//! two matched entries are equal.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::combinatorics::{enumerate_oe_pair_partitions, enumerate_pair_partitions, PairPartition};
use crate::ensemble::MatrixKind;
use crate::error::{LabError, Result};
use crate::seed::{self, domain};

pub const MIN_MC_SAMPLES: u64 = 1_000;
pub const MIN_GRID_SIDE: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GammaMethod {
    #[serde(rename = "monte-carlo")]
    MonteCarlo,
    #[serde(rename = "riemann-grid")]
    RiemannGrid,
}

impl GammaMethod {
    pub fn name(self) -> &'static str {
        match self {
            GammaMethod::MonteCarlo => "monte-carlo",
            GammaMethod::RiemannGrid => "riemann-grid",
        }
    }
}

/// How to evaluate one `gamma(p)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Integrator {
    /// `samples` uniform draws per pairing.
    MonteCarlo { samples: u64, seed: u64 },
    /// Midpoint rule with `side` cells along every axis.
    RiemannGrid { side: usize },
}

impl Integrator {
    fn validate(self) -> Result<()> {
        match self {
            Integrator::MonteCarlo { samples, .. } if samples < MIN_MC_SAMPLES => Err(
                LabError::invalid(format!("need at least {MIN_MC_SAMPLES} samples, got {samples}")),
            ),
            Integrator::RiemannGrid { side } if side < MIN_GRID_SIDE => Err(LabError::invalid(
                format!("grid side must be at least {MIN_GRID_SIDE}, got {side}"),
            )),
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GammaEstimate {
    pub p: usize,
    pub kind: MatrixKind,
    pub value: f64,
    /// Monte Carlo standard error; 0 for the grid.
    pub std_error: f64,
    /// Rigorous bound on `|grid - exact|` from cells the boundary crosses; 0 for Monte Carlo.
    pub bias_bound: f64,
    pub method: GammaMethod,
    pub samples_or_gridsize: u64,
    pub partitions: usize,
}

#[derive(Debug, Clone, Copy)]
struct Step {
    var: usize,
    coef: f64,
    opens: bool,
}

/// The walk of partial sums for one pairing.
#[derive(Debug, Clone)]
struct Walk {
    vars: usize,
    steps: Vec<Step>,
}

impl Walk {
    fn new(pi: &PairPartition, kind: MatrixKind) -> Walk {
        let block = pi.block_index();
        let opens = pi.openers();
        let steps = (0..2 * pi.p())
            .map(|k| {
                let ell = k + 1;
                let coef = match kind {
                    MatrixKind::Toeplitz => {
                        if opens[k] {
                            1.0
                        } else {
                            -1.0
                        }
                    }
                    // -(-1)^l: +1 at odd positions, -1 at even ones
                    MatrixKind::Hankel => {
                        if ell % 2 == 1 {
                            1.0
                        } else {
                            -1.0
                        }
                    }
                };
                Step {
                    var: block[k],
                    coef,
                    opens: opens[k],
                }
            })
            .collect();
        Walk {
            vars: pi.p(),
            steps,
        }
    }

    /// Fraction of `samples` uniform points inside the region.
    fn monte_carlo<R: Rng>(&self, samples: u64, rng: &mut R) -> u64 {
        let mut z = vec![0.0; self.vars];
        let mut hits = 0;
        'draw: for _ in 0..samples {
            let mut partial: f64 = rng.random();
            for step in &self.steps {
                if step.opens {
                    z[step.var] = 2.0 * rng.random::<f64>() - 1.0;
                }
                partial += step.coef * z[step.var];
                if !(0.0..=1.0).contains(&partial) {
                    continue 'draw;
                }
            }
            hits += 1;
        }
        hits
    }

    /// Midpoint-rule cell counts: `(cells whose center is inside, cells the
    /// boundary may cross)`.
    fn grid(&self, side: usize) -> (u64, u64) {
        struct Ctx<'a> {
            steps: &'a [Step],
            side: usize,
            z_half: f64,
            z0_half: f64,
            z: Vec<f64>,
            inside: u64,
            ambiguous: u64,
        }

        fn descend(
            ctx: &mut Ctx<'_>,
            k: usize,
            center: f64,
            open: usize,
            center_in: bool,
            certain_in: bool,
        ) {
            if k == ctx.steps.len() {
                ctx.inside += u64::from(center_in);
                ctx.ambiguous += u64::from(!certain_in);
                return;
            }
            let step = ctx.steps[k];
            if step.opens {
                let open = open + 1;
                let radius = ctx.z0_half + open as f64 * ctx.z_half;
                for b in 0..ctx.side {
                    let zv = -1.0 + (2 * b + 1) as f64 * ctx.z_half;
                    ctx.z[step.var] = zv;
                    let c = center + step.coef * zv;
                    visit(ctx, k, c, radius, open, center_in, certain_in);
                }
            } else {
                let open = open - 1;
                let radius = ctx.z0_half + open as f64 * ctx.z_half;
                let c = center + step.coef * ctx.z[step.var];
                visit(ctx, k, c, radius, open, center_in, certain_in);
            }
        }

        fn visit(
            ctx: &mut Ctx<'_>,
            k: usize,
            c: f64,
            radius: f64,
            open: usize,
            center_in: bool,
            certain_in: bool,
        ) {
            let (lo, hi) = (c - radius, c + radius);
            if hi < 0.0 || lo > 1.0 {
                return;
            }
            let center_in = center_in && (0.0..=1.0).contains(&c);
            let certain_in = certain_in && lo >= 0.0 && hi <= 1.0;
            descend(ctx, k + 1, c, open, center_in, certain_in);
        }

        let mut ctx = Ctx {
            steps: &self.steps,
            side,
            z_half: 1.0 / side as f64,
            z0_half: 0.5 / side as f64,
            z: vec![0.0; self.vars],
            inside: 0,
            ambiguous: 0,
        };
        for a in 0..side {
            let z0 = (2 * a + 1) as f64 * ctx.z0_half;
            // z_0 alone is an interior coordinate of [0, 1]
            descend(&mut ctx, 0, z0, 0, true, true);
        }
        (ctx.inside, ctx.ambiguous)
    }
}

fn partitions_for(kind: MatrixKind, p: usize) -> Result<Vec<PairPartition>> {
    match kind {
        MatrixKind::Toeplitz => enumerate_pair_partitions(p),
        MatrixKind::Hankel => enumerate_oe_pair_partitions(p),
    }
}

fn kind_label(kind: MatrixKind) -> u64 {
    match kind {
        MatrixKind::Toeplitz => 1,
        MatrixKind::Hankel => 2,
    }
}

/// Evaluates `gamma_T(p)` or `gamma_H(p)` with the given integrator.
pub fn gamma(kind: MatrixKind, p: usize, integrator: Integrator) -> Result<GammaEstimate> {
    integrator.validate()?;
    let partitions = partitions_for(kind, p)?;
    let walks: Vec<Walk> = partitions.iter().map(|pi| Walk::new(pi, kind)).collect();
    let box_volume = 2f64.powi(p as i32);

    match integrator {
        Integrator::MonteCarlo { samples, seed } => {
            let per_partition: Vec<(f64, f64)> = walks
                .par_iter()
                .enumerate()
                .map(|(idx, walk)| {
                    let mut rng = seed::stream(
                        seed,
                        &[domain::GAMMA_MC, kind_label(kind), p as u64, idx as u64],
                    );
                    let hits = walk.monte_carlo(samples, &mut rng);
                    let f = hits as f64 / samples as f64;
                    let var = box_volume * box_volume * f * (1.0 - f) / samples as f64;
                    (box_volume * f, var)
                })
                .collect();
            let value = per_partition.iter().map(|(v, _)| v).sum();
            let var: f64 = per_partition.iter().map(|(_, s)| s).sum();
            Ok(GammaEstimate {
                p,
                kind,
                value,
                std_error: var.sqrt(),
                bias_bound: 0.0,
                method: GammaMethod::MonteCarlo,
                samples_or_gridsize: samples,
                partitions: walks.len(),
            })
        }
        Integrator::RiemannGrid { side } => {
            let counts: Vec<(u64, u64)> = walks.par_iter().map(|w| w.grid(side)).collect();
            let cell = (1.0 / side as f64) * (2.0 / side as f64).powi(p as i32);
            let inside: u64 = counts.iter().map(|c| c.0).sum();
            let ambiguous: u64 = counts.iter().map(|c| c.1).sum();
            Ok(GammaEstimate {
                p,
                kind,
                value: inside as f64 * cell,
                std_error: 0.0,
                bias_bound: ambiguous as f64 * cell,
                method: GammaMethod::RiemannGrid,
                samples_or_gridsize: side as u64,
                partitions: walks.len(),
            })
        }
    }
}

pub fn gamma_toeplitz(p: usize, integrator: Integrator) -> Result<GammaEstimate> {
    gamma(MatrixKind::Toeplitz, p, integrator)
}

pub fn gamma_hankel(p: usize, integrator: Integrator) -> Result<GammaEstimate> {
    gamma(MatrixKind::Hankel, p, integrator)
}

/// Upper bound `2^p * #pairings`: `2^p (2p-1)!!` for Toeplitz, `2^p p!` for Hankel.
pub fn gamma_upper_bound(kind: MatrixKind, p: usize) -> f64 {
    let pairings: f64 = match kind {
        MatrixKind::Toeplitz => (1..=p).map(|k| (2 * k - 1) as f64).product(),
        MatrixKind::Hankel => (1..=p).map(|k| k as f64).product(),
    };
    2f64.powi(p as i32) * pairings
}

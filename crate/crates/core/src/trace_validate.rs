//! Exact checks of the index-set trace formulas against dense matrix powers.
//!
//! Toeplitz (`M[i][j] = x_{|i-j|}`, 1-based): with `j_k = i_{k+1} - i_k`,
//! `Tr M^h = sum_i sum_{J in A_h} prod x_{|j_k|} prod_k chi(i + sum_{l<=k} j_l)`
//! where `A_h` is the set of `J in [-n, n]^h` with `sum j_k = 0`.
//!
//! Hankel (`M[i][j] = x_{n-(i+j)+1}`): with `j_k = n + 1 - i_k - i_{k+1}`,
//! the walk visits `i - sum_{t<=l} (-1)^t j_t` (reflected through `n + 1` at odd
//! `l`, which leaves the indicator unchanged). Closing the walk forces
//! `sum (-1)^k j_k = 0` for even `h` and `= 2i - 1 - n` for odd `h`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::ensemble::MatrixKind;
use crate::error::{LabError, Result};
use crate::seed::{self, domain};

pub const DEFAULT_VALIDATE_BUDGET: u128 = 10_000_000;
pub const INPUT_RANGE: i64 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum IndexSetKind {
    ToeplitzA,
    HankelCEven,
    /// Odd-length Hankel set for the 1-based starting row `i`.
    HankelCOdd { i: i64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexSetSpec {
    pub h: usize,
    pub n: usize,
    pub kind: IndexSetKind,
}

impl IndexSetSpec {
    pub fn constant(&self) -> i64 {
        match self.kind {
            IndexSetKind::ToeplitzA | IndexSetKind::HankelCEven => 0,
            IndexSetKind::HankelCOdd { i } => 2 * i - 1 - self.n as i64,
        }
    }

    fn alternating(&self) -> bool {
        !matches!(self.kind, IndexSetKind::ToeplitzA)
    }

    /// `sum j_k` or `sum (-1)^k j_k` over 1-based positions.
    pub fn linear_form(&self, t: &[i64]) -> i64 {
        if self.alternating() {
            t.iter()
                .enumerate()
                .map(|(k, &j)| if k % 2 == 0 { -j } else { j })
                .sum()
        } else {
            t.iter().sum()
        }
    }

    /// Direct membership test on a full tuple.
    pub fn contains(&self, t: &[i64]) -> bool {
        let n = self.n as i64;
        t.len() == self.h && t.iter().all(|j| j.abs() <= n) && self.linear_form(t) == self.constant()
    }

    /// Number of free prefixes, `(2n+1)^{h-1}`.
    pub fn box_size(&self) -> u128 {
        (2 * self.n as u128 + 1).saturating_pow(self.h.saturating_sub(1) as u32)
    }

    fn validate(&self) -> Result<()> {
        if self.h == 0 || self.n == 0 {
            return Err(LabError::invalid("index sets need h >= 1 and n >= 1"));
        }
        match (self.kind, self.h % 2) {
            (IndexSetKind::HankelCEven, 1) => Err(LabError::invalid("C_h needs even h")),
            (IndexSetKind::HankelCOdd { .. }, 0) => Err(LabError::invalid("C_{h,i} needs odd h")),
            (IndexSetKind::HankelCOdd { i }, _) if i < 1 || i > self.n as i64 => {
                Err(LabError::invalid(format!("row {i} outside 1..={}", self.n)))
            }
            _ => Ok(()),
        }
    }

    /// Last coordinate forced by the constraint given the first `h - 1`.
    fn solve_last(&self, prefix: &[i64], constant: i64) -> i64 {
        let h = self.h;
        if self.alternating() {
            let partial: i64 = prefix
                .iter()
                .enumerate()
                .map(|(k, &j)| if k % 2 == 0 { -j } else { j })
                .sum();
            // (-1)^h j_h = constant - partial
            if h.is_multiple_of(2) {
                constant - partial
            } else {
                partial - constant
            }
        } else {
            constant - prefix.iter().sum::<i64>()
        }
    }
}

/// Iterator over a constrained index set: an odometer over the first `h - 1`
/// coordinates with the last one solved from the constraint.
#[derive(Debug, Clone)]
pub struct IndexSetIter {
    spec: IndexSetSpec,
    prefix: Vec<i64>,
    done: bool,
}

impl Iterator for IndexSetIter {
    type Item = Vec<i64>;

    fn next(&mut self) -> Option<Vec<i64>> {
        let n = self.spec.n as i64;
        while !self.done {
            let last = self.spec.solve_last(&self.prefix, self.spec.constant());
            let candidate = (last.abs() <= n).then(|| {
                let mut t = self.prefix.clone();
                t.push(last);
                t
            });
            self.done = !advance(&mut self.prefix, n);
            if candidate.is_some() {
                return candidate;
            }
        }
        None
    }
}

/// Odometer step over `[-n, n]^len`; false once it wraps.
fn advance(digits: &mut [i64], n: i64) -> bool {
    for d in digits.iter_mut().rev() {
        if *d < n {
            *d += 1;
            return true;
        }
        *d = -n;
    }
    false
}

fn check_budget(spec: &IndexSetSpec, budget: u128) -> Result<()> {
    let required = spec.box_size();
    if required > budget {
        return Err(LabError::ResourceLimit { required, budget });
    }
    Ok(())
}

pub fn enumerate_index_set(spec: IndexSetSpec, budget: u128) -> Result<IndexSetIter> {
    spec.validate()?;
    check_budget(&spec, budget)?;
    Ok(IndexSetIter {
        prefix: vec![-(spec.n as i64); spec.h - 1],
        spec,
        done: false,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FormulaOptions {
    pub budget: u128,
    /// Shift the indicator window from `[1, n]` to `[0, n-1]`; the identity must then fail.
    pub mutate: bool,
}

impl Default for FormulaOptions {
    fn default() -> Self {
        FormulaOptions {
            budget: DEFAULT_VALIDATE_BUDGET,
            mutate: false,
        }
    }
}

impl FormulaOptions {
    fn window(&self, n: i64) -> (i64, i64) {
        if self.mutate {
            (0, n - 1)
        } else {
            (1, n)
        }
    }
}

fn product(factors: impl Iterator<Item = Option<BigRational>>) -> BigRational {
    let mut acc = BigRational::one();
    for f in factors {
        match f {
            Some(v) => acc *= v,
            None => return BigRational::zero(),
        }
    }
    acc
}

/// Formula side for a Toeplitz matrix with generator `x_0..x_{n-1}`.
pub fn trace_formula_toeplitz(x: &[BigRational], n: usize, h: usize, opts: FormulaOptions) -> Result<BigRational> {
    if x.len() != n {
        return Err(LabError::invalid(format!("expected {n} generator values, got {}", x.len())));
    }
    let spec = IndexSetSpec { h, n, kind: IndexSetKind::ToeplitzA };
    let (lo, hi) = opts.window(n as i64);
    let mut total = BigRational::zero();
    for t in enumerate_index_set(spec, opts.budget)? {
        let rows = (1..=n as i64)
            .filter(|&i| {
                let mut pos = i;
                t.iter().all(|&j| {
                    pos += j;
                    (lo..=hi).contains(&pos)
                })
            })
            .count();
        if rows > 0 {
            let term = product(t.iter().map(|&j| x.get(j.unsigned_abs() as usize).cloned()));
            total += term * BigRational::from_integer(BigInt::from(rows));
        }
    }
    Ok(total)
}

/// Formula side for a Hankel matrix with generator `x_{-(n-1)}..x_{n-1}`
/// stored at offset `n - 1`.
pub fn trace_formula_hankel(x: &[BigRational], n: usize, h: usize, opts: FormulaOptions) -> Result<BigRational> {
    if x.len() != 2 * n - 1 {
        return Err(LabError::invalid(format!(
            "expected {} generator values, got {}",
            2 * n - 1,
            x.len()
        )));
    }
    let top = n as i64 - 1;
    let lookup = |j: i64| -> Option<BigRational> {
        (j.abs() <= top).then(|| x[(j + top) as usize].clone())
    };
    let (lo, hi) = opts.window(n as i64);
    let walk_ok = |i: i64, t: &[i64]| {
        let mut pos = i;
        t.iter().enumerate().all(|(k, &j)| {
            // subtract (-1)^t j_t for 1-based t = k + 1
            pos += if k % 2 == 0 { j } else { -j };
            (lo..=hi).contains(&pos)
        })
    };
    let mut total = BigRational::zero();
    if h.is_multiple_of(2) {
        let spec = IndexSetSpec { h, n, kind: IndexSetKind::HankelCEven };
        for t in enumerate_index_set(spec, opts.budget)? {
            let rows = (1..=n as i64).filter(|&i| walk_ok(i, &t)).count();
            if rows > 0 {
                let term = product(t.iter().map(|&j| lookup(j)));
                total += term * BigRational::from_integer(BigInt::from(rows));
            }
        }
    } else {
        // enumerate the free prefix once and solve the last coordinate per row
        let probe = IndexSetSpec { h, n, kind: IndexSetKind::HankelCOdd { i: 1 } };
        probe.validate()?;
        check_budget(&probe, opts.budget)?;
        let bound = n as i64;
        let mut prefix = vec![-bound; h - 1];
        loop {
            for i in 1..=n as i64 {
                let spec = IndexSetSpec { h, n, kind: IndexSetKind::HankelCOdd { i } };
                let last = spec.solve_last(&prefix, spec.constant());
                if last.abs() > bound {
                    continue;
                }
                let mut t = prefix.clone();
                t.push(last);
                if walk_ok(i, &t) {
                    total += product(t.iter().map(|&j| lookup(j)));
                }
            }
            if !advance(&mut prefix, bound) {
                break;
            }
        }
    }
    Ok(total)
}

fn rational_matmul(a: &[BigRational], b: &[BigRational], n: usize) -> Vec<BigRational> {
    let mut c = vec![BigRational::zero(); n * n];
    for i in 0..n {
        for k in 0..n {
            if a[i * n + k].is_zero() {
                continue;
            }
            for j in 0..n {
                c[i * n + j] += &a[i * n + k] * &b[k * n + j];
            }
        }
    }
    c
}

/// `Tr A^h` by repeated exact multiplication.
pub fn dense_power_trace_exact(a: &[BigRational], n: usize, h: usize) -> BigRational {
    if h == 0 {
        return BigRational::from_integer(BigInt::from(n));
    }
    let mut p = a.to_vec();
    for _ in 1..h {
        p = rational_matmul(&p, a, n);
    }
    (0..n).map(|i| p[i * n + i].clone()).sum()
}

/// Dense `n x n` matrix (row-major), 0-based `M[i][j] = x_{|i-j|}` or `x_{n-1-i-j}`.
pub fn dense_matrix(kind: MatrixKind, x: &[BigRational], n: usize) -> Vec<BigRational> {
    let mut out = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let idx = match kind {
                MatrixKind::Toeplitz => i.abs_diff(j),
                // x stored from -(n-1): index (n-1-i-j) + (n-1)
                MatrixKind::Hankel => 2 * (n - 1) - i - j,
            };
            out.push(x[idx].clone());
        }
    }
    out
}

pub fn trace_formula(kind: MatrixKind, x: &[BigRational], n: usize, h: usize, opts: FormulaOptions) -> Result<BigRational> {
    match kind {
        MatrixKind::Toeplitz => trace_formula_toeplitz(x, n, h, opts),
        MatrixKind::Hankel => trace_formula_hankel(x, n, h, opts),
    }
}

/// Random integer generator in `[-3, 3]` of the right length for `kind`.
pub fn random_generator(kind: MatrixKind, n: usize, h: usize, seed: u64) -> Vec<BigRational> {
    let kind_tag = match kind {
        MatrixKind::Toeplitz => 1,
        MatrixKind::Hankel => 2,
    };
    let mut rng = seed::stream(seed, &[domain::VALIDATE, kind_tag, n as u64, h as u64]);
    let len = match kind {
        MatrixKind::Toeplitz => n,
        MatrixKind::Hankel => 2 * n - 1,
    };
    (0..len)
        .map(|_| BigRational::from_integer(BigInt::from(rng.random_range(-INPUT_RANGE..=INPUT_RANGE))))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseResult {
    pub kind: MatrixKind,
    pub n: usize,
    pub h: usize,
    pub seed: u64,
    pub formula: String,
    pub dense: String,
    pub pass: bool,
}

pub fn validate_case(kind: MatrixKind, n: usize, h: usize, seed: u64, opts: FormulaOptions) -> Result<CaseResult> {
    let x = random_generator(kind, n, h, seed);
    let formula = trace_formula(kind, &x, n, h, opts)?;
    let dense = dense_power_trace_exact(&dense_matrix(kind, &x, n), n, h);
    Ok(CaseResult {
        kind,
        n,
        h,
        seed,
        pass: formula == dense,
        formula: formula.to_string(),
        dense: dense.to_string(),
    })
}

/// `(n, h)` pairs checked by default: every `n <= 6` with `h <= 4`, and `n <= 3` with `h <= 6`.
pub fn default_grid() -> Vec<(usize, usize)> {
    let mut grid: Vec<(usize, usize)> = Vec::new();
    for n in 1..=6 {
        for h in 1..=4 {
            grid.push((n, h));
        }
    }
    for n in 1..=3 {
        for h in 5..=6 {
            grid.push((n, h));
        }
    }
    grid
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub mutate: bool,
    pub passed: usize,
    pub failed: usize,
    pub cases: Vec<CaseResult>,
}

impl ValidationReport {
    pub fn all_passed(&self) -> bool {
        self.failed == 0
    }
}

/// Every kind, grid point and seed; cases are independent and run in order.
pub fn run_suite(grid: &[(usize, usize)], seeds: &[u64], opts: FormulaOptions) -> Result<ValidationReport> {
    use rayon::prelude::*;
    let jobs: Vec<(MatrixKind, usize, usize, u64)> = [MatrixKind::Toeplitz, MatrixKind::Hankel]
        .iter()
        .flat_map(|&k| grid.iter().flat_map(move |&(n, h)| seeds.iter().map(move |&s| (k, n, h, s))))
        .collect();
    let cases = jobs
        .par_iter()
        .map(|&(k, n, h, s)| validate_case(k, n, h, s, opts))
        .collect::<Result<Vec<_>>>()?;
    let passed = cases.iter().filter(|c| c.pass).count();
    Ok(ValidationReport {
        mutate: opts.mutate,
        passed,
        failed: cases.len() - passed,
        cases,
    })
}

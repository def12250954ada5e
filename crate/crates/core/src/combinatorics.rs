//! Pair partitions, matched-vector predicates, and the offset-vector counts
//! `#G^(T)_{2p,m}` / `#G^(H)_{2p,m}`.
//!
//! Positions are 1-based throughout, matching how pair partitions of
//! `{1, .., 2p}` are usually written.

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

/// Default cap on the number of candidate vectors a brute-force count may visit.
pub const DEFAULT_ENUMERATION_BUDGET: u128 = 100_000_000;

/// A pairing of `{1, .., 2p}` into blocks `(r_t, s_t)` with `r_t < s_t`,
/// stored sorted by leader `r_t`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PairPartition {
    blocks: Vec<(usize, usize)>,
    #[serde(skip)]
    leader: Vec<usize>,
}

impl PairPartition {
    /// Validates and canonicalizes `blocks`.
    pub fn new(blocks: Vec<(usize, usize)>) -> Result<Self> {
        if blocks.is_empty() {
            return Err(LabError::invalid("a pair partition needs at least one block"));
        }
        let size = 2 * blocks.len();
        let mut seen = vec![false; size + 1];
        let mut canon = Vec::with_capacity(blocks.len());
        for &(a, b) in &blocks {
            let (r, s) = if a < b { (a, b) } else { (b, a) };
            if r == 0 || s > size || r == s {
                return Err(LabError::invalid(format!(
                    "block ({a}, {b}) is not a pair inside 1..={size}"
                )));
            }
            if seen[r] || seen[s] {
                return Err(LabError::invalid(format!("blocks overlap at ({a}, {b})")));
            }
            seen[r] = true;
            seen[s] = true;
            canon.push((r, s));
        }
        canon.sort_unstable();
        Ok(Self::from_canonical(canon))
    }

    fn from_canonical(blocks: Vec<(usize, usize)>) -> Self {
        let mut leader = vec![0; 2 * blocks.len()];
        for &(r, s) in &blocks {
            leader[r - 1] = r;
            leader[s - 1] = r;
        }
        PairPartition { blocks, leader }
    }

    /// Half-size `p`.
    pub fn p(&self) -> usize {
        self.blocks.len()
    }

    pub fn blocks(&self) -> &[(usize, usize)] {
        &self.blocks
    }

    fn check(&self, ell: usize) -> Result<()> {
        if ell == 0 || ell > self.leader.len() {
            return Err(LabError::invalid(format!(
                "position {ell} outside 1..={}",
                self.leader.len()
            )));
        }
        Ok(())
    }

    /// `pi(ell)`: the smaller element of the block containing `ell`.
    pub fn project(&self, ell: usize) -> Result<usize> {
        self.check(ell)?;
        Ok(self.leader[ell - 1])
    }

    /// `+1` if `ell` leads its block, `-1` otherwise.
    pub fn epsilon(&self, ell: usize) -> Result<i8> {
        self.check(ell)?;
        Ok(if self.leader[ell - 1] == ell { 1 } else { -1 })
    }

    /// Every block joins an odd and an even position.
    pub fn is_odd_even(&self) -> bool {
        self.blocks.iter().all(|&(r, s)| (r + s) % 2 == 1)
    }

    /// Number of the block each position belongs to, in leader order (0-based).
    pub fn block_index(&self) -> Vec<usize> {
        let mut out = vec![0; self.leader.len()];
        for (t, &(r, s)) in self.blocks.iter().enumerate() {
            out[r - 1] = t;
            out[s - 1] = t;
        }
        out
    }

    /// Whether each position (0-based) opens its block.
    pub fn openers(&self) -> Vec<bool> {
        (1..=self.leader.len()).map(|l| self.leader[l - 1] == l).collect()
    }
}

fn pairings(p: usize, odd_even: bool) -> Result<Vec<PairPartition>> {
    if p < 1 {
        return Err(LabError::invalid("pair partitions need p >= 1"));
    }
    fn recurse(
        used: &mut [bool],
        current: &mut Vec<(usize, usize)>,
        odd_even: bool,
        out: &mut Vec<PairPartition>,
    ) {
        let Some(first) = used.iter().position(|u| !u) else {
            out.push(PairPartition::from_canonical(current.clone()));
            return;
        };
        used[first] = true;
        for partner in first + 1..used.len() {
            if used[partner] || (odd_even && (first + partner) % 2 == 0) {
                continue;
            }
            used[partner] = true;
            current.push((first + 1, partner + 1));
            recurse(used, current, odd_even, out);
            current.pop();
            used[partner] = false;
        }
        used[first] = false;
    }
    let mut out = Vec::new();
    recurse(&mut vec![false; 2 * p], &mut Vec::with_capacity(p), odd_even, &mut out);
    Ok(out)
}

/// All of `P_2(2p)` in canonical order; `(2p-1)!!` partitions.
pub fn enumerate_pair_partitions(p: usize) -> Result<Vec<PairPartition>> {
    pairings(p, false)
}

/// The odd-even pairings `P_2^{oe}(2p)`; `p!` partitions.
pub fn enumerate_oe_pair_partitions(p: usize) -> Result<Vec<PairPartition>> {
    pairings(p, true)
}

/// `(2p-1)!!`
pub fn pair_partition_count(p: usize) -> BigUint {
    (1..=p).fold(BigUint::one(), |acc, k| acc * BigUint::from(2 * k - 1))
}

/// `p!`
pub fn oe_pair_partition_count(p: usize) -> BigUint {
    (1..=p).fold(BigUint::one(), |acc, k| acc * BigUint::from(k))
}

/// A vector `d` in `{-m, .., m}^h`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct OffsetVector {
    m: i64,
    d: Vec<i64>,
}

impl OffsetVector {
    pub fn new(m: usize, d: Vec<i64>) -> Result<Self> {
        let m = m as i64;
        if d.is_empty() {
            return Err(LabError::invalid("offset vector must be nonempty"));
        }
        if let Some(bad) = d.iter().find(|v| v.abs() > m) {
            return Err(LabError::invalid(format!("offset {bad} outside [-{m}, {m}]")));
        }
        Ok(OffsetVector { m, d })
    }

    pub fn entries(&self) -> &[i64] {
        &self.d
    }

    pub fn sum(&self) -> i64 {
        self.d.iter().sum()
    }

    /// `sum_r (-1)^r d_r` with 1-based `r`.
    pub fn alternating_sum(&self) -> i64 {
        alternating_sum(&self.d)
    }

    /// Negates the odd positions; maps `G^(T)` onto `G^(H)` and back.
    pub fn flip_odd_positions(&self) -> OffsetVector {
        let d = self
            .d
            .iter()
            .enumerate()
            .map(|(k, &v)| if k % 2 == 0 { -v } else { v })
            .collect();
        OffsetVector { m: self.m, d }
    }
}

fn alternating_sum(v: &[i64]) -> i64 {
    v.iter()
        .enumerate()
        .map(|(k, &x)| if k % 2 == 0 { -x } else { x })
        .sum()
}

/// Whether every entry is `±` pair matched: its absolute value occurs exactly
/// twice and the two occurrences have opposite signs. Zero carries no sign and
/// is never `±` matched.
pub fn is_pm_pair_matched(v: &[i64]) -> bool {
    if v.is_empty() || v.len() % 2 == 1 {
        return false;
    }
    v.iter().all(|&x| {
        if x == 0 {
            return false;
        }
        let same_abs = v.iter().filter(|y| y.abs() == x.abs()).count();
        let opposite = v.iter().filter(|&&y| y == -x).count();
        same_abs == 2 && opposite == 1
    })
}

/// Whether every value occurs exactly twice (sign included), once at an odd
/// and once at an even 1-based position.
pub fn is_oe_pair_matched(v: &[i64]) -> bool {
    if v.is_empty() || v.len() % 2 == 1 {
        return false;
    }
    v.iter().enumerate().all(|(k, &x)| {
        let positions: Vec<usize> = v
            .iter()
            .enumerate()
            .filter(|&(_, &y)| y == x)
            .map(|(i, _)| i)
            .collect();
        debug_assert!(positions.contains(&k));
        positions.len() == 2 && (positions[0] + positions[1]) % 2 == 1
    })
}

/// `C(a, b)`, zero whenever `b < 0`, `a < 0`, or `a < b`.
pub fn binomial(a: i64, b: i64) -> BigUint {
    if a < 0 || b < 0 || a < b {
        return BigUint::zero();
    }
    let b = b.min(a - b);
    let mut acc = BigUint::one();
    for k in 0..b {
        acc = acc * BigUint::from((a - k) as u64) / BigUint::from((k + 1) as u64);
    }
    acc
}

/// `#G^(T)_{2p,m}`: vectors in `{-m..m}^{2p}` with zero sum, by the
/// inclusion-exclusion closed form
/// `sum_l (-1)^l C(2p, l) C(2p + 2pm - (2m+1) l - 1, 2p - 1)`.
pub fn card_g_t(p: usize, m: usize) -> Result<BigUint> {
    if p < 1 {
        return Err(LabError::invalid("cardinality needs p >= 1"));
    }
    let (p, m) = (p as i64, m as i64);
    let top = 2 * m * p / (2 * m + 1);
    let mut total = BigInt::zero();
    for l in 0..=top {
        let term = BigInt::from(binomial(2 * p, l))
            * BigInt::from(binomial(2 * p + 2 * p * m - (2 * m + 1) * l - 1, 2 * p - 1));
        if l % 2 == 0 {
            total += term;
        } else {
            total -= term;
        }
    }
    debug_assert!(!total.is_negative());
    Ok(total.to_biguint().expect("count is nonnegative"))
}

/// `#G^(H)_{2p,m}`: zero alternating sum. Equal to `#G^(T)_{2p,m}` through the
/// odd-position sign flip.
pub fn card_g_h(p: usize, m: usize) -> Result<BigUint> {
    card_g_t(p, m)
}

/// `(2m+1)^{2p}`, saturating.
pub fn offset_box_size(p: usize, m: usize) -> u128 {
    u32::try_from(2 * p)
        .ok()
        .and_then(|e| (2 * m as u128 + 1).checked_pow(e))
        .unwrap_or(u128::MAX)
}

/// Exhaustive count over `{-m..m}^{2p}` of vectors with `sum d_r = 0`
/// (`alternating = false`) or `sum (-1)^r d_r = 0` (`alternating = true`).
///
/// Branches whose partial sum can no longer return to zero are cut. The
/// first coordinate is split across rayon workers; the result does not
/// depend on the worker count.
pub fn card_g_bruteforce(p: usize, m: usize, alternating: bool, budget: u128) -> Result<BigUint> {
    if p < 1 {
        return Err(LabError::invalid("cardinality needs p >= 1"));
    }
    let required = offset_box_size(p, m);
    if required > budget {
        return Err(LabError::ResourceLimit { required, budget });
    }
    let len = 2 * p;
    let mi = m as i64;

    fn walk(pos: usize, len: usize, m: i64, alternating: bool, partial: i64) -> u64 {
        let remaining = (len - pos) as i64;
        if partial.abs() > m * remaining {
            return 0;
        }
        if pos == len {
            return u64::from(partial == 0);
        }
        let sign = if alternating && pos.is_multiple_of(2) { -1 } else { 1 };
        (-m..=m)
            .map(|d| walk(pos + 1, len, m, alternating, partial + sign * d))
            .sum()
    }

    let total: u64 = (-mi..=mi)
        .into_par_iter()
        .map(|d1| {
            let first = if alternating { -d1 } else { d1 };
            walk(1, len, mi, alternating, first)
        })
        .sum();
    Ok(BigUint::from(total))
}

/// Convenience for tables: the count as `f64` (may round for huge values).
pub fn to_f64(x: &BigUint) -> f64 {
    x.to_f64().unwrap_or(f64::INFINITY)
}

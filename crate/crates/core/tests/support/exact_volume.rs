//! Exact volume of a bounded polytope `{x : A x <= b}` with rational data.
//!
//! Vertices come from solving every `d`-subset of constraints as equalities.
//! The volume is a pulling triangulation: from the smallest vertex of a face,
//! cone over every facet of that face which avoids it, recursively, and sum
//! `|det| / d!` over the resulting simplices.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub type Q = BigRational;

pub fn q(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

#[derive(Clone, Debug)]
pub struct Polytope {
    pub dim: usize,
    /// Rows `(a, b)` meaning `a . x <= b`.
    pub rows: Vec<(Vec<Q>, Q)>,
}

impl Polytope {
    pub fn new(dim: usize) -> Self {
        Polytope { dim, rows: Vec::new() }
    }

    pub fn push(&mut self, a: Vec<Q>, b: Q) {
        assert_eq!(a.len(), self.dim);
        if !self.rows.iter().any(|(ra, rb)| *ra == a && *rb == b) {
            self.rows.push((a, b));
        }
    }

    /// `lo <= a . x <= hi`.
    pub fn push_between(&mut self, a: Vec<Q>, lo: Q, hi: Q) {
        let neg: Vec<Q> = a.iter().map(|v| -v.clone()).collect();
        self.push(a, hi);
        self.push(neg, -lo);
    }

    fn slack_is_zero(&self, row: usize, x: &[Q]) -> bool {
        dot(&self.rows[row].0, x) == self.rows[row].1
    }

    fn feasible(&self, x: &[Q]) -> bool {
        self.rows.iter().all(|(a, b)| dot(a, x) <= *b)
    }

    pub fn vertices(&self) -> Vec<Vertex> {
        let d = self.dim;
        let mut points: Vec<Vec<Q>> = Vec::new();
        let mut subset: Vec<usize> = (0..d).collect();
        let m = self.rows.len();
        if m < d {
            return Vec::new();
        }
        loop {
            let a: Vec<Vec<Q>> = subset.iter().map(|&i| self.rows[i].0.clone()).collect();
            let b: Vec<Q> = subset.iter().map(|&i| self.rows[i].1.clone()).collect();
            if let Some(x) = solve(a, b) {
                if self.feasible(&x) && !points.contains(&x) {
                    points.push(x);
                }
            }
            // next d-subset in lexicographic order
            let mut k = d;
            loop {
                if k == 0 {
                    return points
                        .into_iter()
                        .map(|x| {
                            let tight = (0..m).filter(|&r| self.slack_is_zero(r, &x)).collect();
                            Vertex { x, tight }
                        })
                        .collect();
                }
                k -= 1;
                if subset[k] < m - d + k {
                    subset[k] += 1;
                    for j in k + 1..d {
                        subset[j] = subset[j - 1] + 1;
                    }
                    break;
                }
            }
        }
    }

    pub fn volume(&self) -> Q {
        let verts = self.vertices();
        if verts.len() <= self.dim {
            return Q::zero();
        }
        let all: Vec<usize> = (0..verts.len()).collect();
        if affine_rank(&verts, &all) < self.dim {
            return Q::zero();
        }
        let mut simplices = Vec::new();
        triangulate(&verts, &all, self.dim, &mut Vec::new(), &mut simplices);
        let mut fact = Q::one();
        for k in 2..=self.dim {
            fact *= q(k as i64);
        }
        simplices
            .iter()
            .map(|s| simplex_det(&verts, s).abs())
            .fold(Q::zero(), |acc, v| acc + v)
            / fact
    }
}

#[derive(Clone, Debug)]
pub struct Vertex {
    pub x: Vec<Q>,
    pub tight: BTreeSet<usize>,
}

fn dot(a: &[Q], x: &[Q]) -> Q {
    a.iter().zip(x).fold(Q::zero(), |acc, (u, v)| acc + u * v)
}

/// Unique solution of the square system, if nonsingular.
fn solve(mut a: Vec<Vec<Q>>, mut b: Vec<Q>) -> Option<Vec<Q>> {
    let d = b.len();
    for col in 0..d {
        let pivot = (col..d).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, pivot);
        b.swap(col, pivot);
        for r in 0..d {
            if r != col && !a[r][col].is_zero() {
                let f = &a[r][col] / &a[col][col];
                for c in col..d {
                    let v = &f * &a[col][c];
                    a[r][c] -= v;
                }
                let v = &f * &b[col];
                b[r] -= v;
            }
        }
    }
    Some((0..d).map(|i| &b[i] / &a[i][i]).collect())
}

fn rank(mut rows: Vec<Vec<Q>>) -> usize {
    let cols = rows.first().map_or(0, |r| r.len());
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][c].is_zero()) else {
            continue;
        };
        rows.swap(r, p);
        for i in r + 1..rows.len() {
            if !rows[i][c].is_zero() {
                let f = &rows[i][c] / &rows[r][c];
                for k in c..cols {
                    let v = &f * &rows[r][k];
                    rows[i][k] -= v;
                }
            }
        }
        r += 1;
    }
    r
}

/// Dimension of the affine hull of the chosen vertices.
fn affine_rank(verts: &[Vertex], ids: &[usize]) -> usize {
    if ids.len() <= 1 {
        return 0;
    }
    let base = &verts[ids[0]].x;
    let diffs = ids[1..]
        .iter()
        .map(|&i| verts[i].x.iter().zip(base).map(|(a, b)| a - b).collect())
        .collect();
    rank(diffs)
}

/// Appends the simplices (as vertex-id lists) of a pulling triangulation of the
/// face spanned by `face` (dimension `k`), each extended by the apexes in `apex`.
fn triangulate(verts: &[Vertex], face: &[usize], k: usize, apex: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if k == 0 {
        let mut s = apex.clone();
        s.push(face[0]);
        out.push(s);
        return;
    }
    let v0 = face[0];
    // constraints tight on the whole face
    let common: BTreeSet<usize> = face
        .iter()
        .map(|&i| verts[i].tight.clone())
        .reduce(|a, b| a.intersection(&b).copied().collect())
        .unwrap_or_default();
    let candidates: BTreeSet<usize> = face.iter().flat_map(|&i| verts[i].tight.iter().copied()).collect();
    let mut seen: Vec<Vec<usize>> = Vec::new();
    for c in candidates.difference(&common) {
        let sub: Vec<usize> = face.iter().copied().filter(|&i| verts[i].tight.contains(c)).collect();
        if sub.contains(&v0) || seen.contains(&sub) {
            continue;
        }
        if affine_rank(verts, &sub) == k - 1 {
            seen.push(sub.clone());
            apex.push(v0);
            triangulate(verts, &sub, k - 1, apex, out);
            apex.pop();
        }
    }
}

fn simplex_det(verts: &[Vertex], s: &[usize]) -> Q {
    let base = &verts[s[0]].x;
    let mut m: Vec<Vec<Q>> = s[1..]
        .iter()
        .map(|&i| verts[i].x.iter().zip(base).map(|(a, b)| a - b).collect())
        .collect();
    let d = m.len();
    let mut det = Q::one();
    for c in 0..d {
        let Some(p) = (c..d).find(|&r| !m[r][c].is_zero()) else {
            return Q::zero();
        };
        if p != c {
            m.swap(p, c);
            det = -det;
        }
        det *= m[c][c].clone();
        for r in c + 1..d {
            if !m[r][c].is_zero() {
                let f = &m[r][c] / &m[c][c];
                for k in c..d {
                    let v = &f * &m[c][k];
                    m[r][k] -= v;
                }
            }
        }
    }
    det
}

/// The partial-sum region of one pairing: `(z_0, z_1..z_p)` in
/// `[0,1] x [-1,1]^p` with `z_0 + sum_{l<=s} coef_l z_{block(l)}` in `[0,1]`.
/// `blocks` are 1-based pairs; `coef(l, is_opener)` gives the sign at position `l`.
pub fn pairing_region(blocks: &[(usize, usize)], coef: impl Fn(usize, bool) -> i64) -> Polytope {
    let p = blocks.len();
    let d = p + 1;
    let mut poly = Polytope::new(d);
    let unit = |i: usize| -> Vec<Q> { (0..d).map(|j| if i == j { q(1) } else { q(0) }).collect() };
    poly.push_between(unit(0), q(0), q(1));
    for k in 1..=p {
        poly.push_between(unit(k), q(-1), q(1));
    }
    let mut sorted = blocks.to_vec();
    sorted.sort();
    let mut a = unit(0);
    for ell in 1..=2 * p {
        let (var, opener) = sorted
            .iter()
            .enumerate()
            .find_map(|(t, &(r, s))| (r == ell || s == ell).then_some((t + 1, r == ell)))
            .expect("position covered");
        a[var] += q(coef(ell, opener));
        poly.push_between(a.clone(), q(0), q(1));
    }
    poly
}

/// Every pairing of `{1..2p}` (optionally only odd-even ones), built independently
/// of the library enumerator.
pub fn pairings(p: usize, odd_even: bool) -> Vec<Vec<(usize, usize)>> {
    fn rec(free: &[usize], odd_even: bool, acc: &mut Vec<(usize, usize)>, out: &mut Vec<Vec<(usize, usize)>>) {
        let Some((&first, rest)) = free.split_first() else {
            out.push(acc.clone());
            return;
        };
        for (k, &partner) in rest.iter().enumerate() {
            if odd_even && (first + partner) % 2 == 0 {
                continue;
            }
            let remaining: Vec<usize> = rest.iter().enumerate().filter(|&(j, _)| j != k).map(|(_, &v)| v).collect();
            acc.push((first, partner));
            rec(&remaining, odd_even, acc, out);
            acc.pop();
        }
    }
    let all: Vec<usize> = (1..=2 * p).collect();
    let mut out = Vec::new();
    rec(&all, odd_even, &mut Vec::new(), &mut out);
    out
}

pub fn gamma_toeplitz_exact(p: usize) -> Q {
    pairings(p, false)
        .iter()
        .map(|b| pairing_region(b, |_, opener| if opener { 1 } else { -1 }).volume())
        .fold(Q::zero(), |a, v| a + v)
}

pub fn gamma_hankel_exact(p: usize) -> Q {
    pairings(p, true)
        .iter()
        .map(|b| pairing_region(b, |ell, _| if ell % 2 == 1 { 1 } else { -1 }).volume())
        .fold(Q::zero(), |a, v| a + v)
}

pub fn to_f64(x: &Q) -> f64 {
    use num_traits::ToPrimitive;
    x.to_f64().expect("finite")
}

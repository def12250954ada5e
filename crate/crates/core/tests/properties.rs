use std::collections::{BTreeSet, HashMap};

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Pow, Signed, ToPrimitive, Zero};
use proptest::prelude::*;

use lsdlab::combinatorics::*;
use lsdlab::ensemble::*;
use lsdlab::moments::*;
use lsdlab::spectra::*;

fn kind_strategy() -> impl Strategy<Value = MatrixKind> {
    prop_oneof![Just(MatrixKind::Toeplitz), Just(MatrixKind::Hankel)]
}

fn dist_strategy() -> impl Strategy<Value = EntryDistribution> {
    (0usize..3).prop_map(|i| EntryDistribution::ALL[i])
}

#[test]
fn base_distributions_have_mean_zero_and_unit_variance() {
    // fourth moments: normal 3, Rademacher 1, uniform 9/5
    for (dist, mu4) in EntryDistribution::ALL.into_iter().zip([3.0, 1.0, 1.8]) {
        let x = sample_raw(&MovingAverageProcess::new(0, dist, 77), 0, 999_999).unwrap();
        let n = x.len() as f64;
        let mean = x.values().iter().sum::<f64>() / n;
        let var = x.values().iter().map(|v| v * v).sum::<f64>() / n;
        assert!(mean.abs() <= 5.0 / n.sqrt(), "{dist} mean {mean}");
        let se = ((mu4 - 1.0) / n).sqrt();
        assert!((var - 1.0).abs() <= 5.0 * se + 1e-12, "{dist} variance {var}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn matrices_are_symmetric_and_patterned(kind in kind_strategy(), dist in dist_strategy(),
                                            n in 1usize..40, m in 0usize..4, seed in any::<u64>()) {
        let process = MovingAverageProcess::new(m, dist, seed);
        let mat = build(kind, &process.realize(n).unwrap(), n).unwrap();
        for i in 0..n {
            for j in 0..n {
                prop_assert_eq!(mat.get(i, j).to_bits(), mat.get(j, i).to_bits());
                if i + 1 < n && j + 1 < n && kind == MatrixKind::Toeplitz {
                    prop_assert_eq!(mat.get(i, j), mat.get(i + 1, j + 1));
                }
                if i + 1 < n && j >= 1 && kind == MatrixKind::Hankel {
                    prop_assert_eq!(mat.get(i, j), mat.get(i + 1, j - 1));
                }
            }
        }
        let again = build(kind, &process.realize(n).unwrap(), n).unwrap();
        prop_assert_eq!(mat, again);
    }

    #[test]
    fn cardinality_bounds_and_identity(p in 1usize..12, m in 0usize..6) {
        let t = card_g_t(p, m).unwrap();
        prop_assert!(t >= BigUint::one());
        prop_assert!(t <= BigUint::from(2 * m + 1).pow(2 * p as u32));
        prop_assert_eq!(t, card_g_h(p, m).unwrap());
    }

    #[test]
    fn matched_vectors_have_the_implied_structure(v in proptest::collection::vec(-4i64..=4, 0..8)) {
        let mut counts: HashMap<i64, usize> = HashMap::new();
        for &x in &v {
            *counts.entry(x).or_default() += 1;
        }
        if is_oe_pair_matched(&v) {
            prop_assert!(counts.values().all(|c| c % 2 == 0));
        }
        if is_pm_pair_matched(&v) {
            prop_assert_eq!(v.iter().sum::<i64>(), 0);
        }
    }

    #[test]
    fn paired_vectors_are_recognized(values in proptest::collection::btree_set(1i64..50, 1..4), perm_seed in any::<u64>()) {
        // build a +/- matched vector from distinct magnitudes, in a scrambled order
        let mut v: Vec<i64> = values.iter().flat_map(|&x| [x, -x]).collect();
        let len = v.len();
        let mut state = perm_seed;
        for i in (1..len).rev() {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            v.swap(i, (state >> 33) as usize % (i + 1));
        }
        prop_assert!(is_pm_pair_matched(&v));
    }

    #[test]
    fn trace_matches_eigenvalue_sum(kind in kind_strategy(), n in 1usize..60, m in 0usize..3, seed in any::<u64>()) {
        let mat = build(kind, &MovingAverageProcess::new(m, EntryDistribution::UniformSym, seed).realize(n).unwrap(), n).unwrap();
        let ev = eigenvalues_symmetric(&mat).unwrap();
        prop_assert!(ev.windows(2).all(|w| w[0] <= w[1]));
        let trace = mat.trace();
        prop_assert!((ev.iter().sum::<f64>() - trace).abs() <= 1e-9 * (1.0 + trace.abs()));
        let s = esd(&ev, DEFAULT_BINS, 2).unwrap();
        prop_assert_eq!(s.histogram.total() as usize, n);
        prop_assert!(s.moment(2).unwrap() >= 0.0);
        let z = esd(&eigenvalues_symmetric(&zero_diagonal(&mat)).unwrap(), DEFAULT_BINS, 2).unwrap();
        let bound = mat.diagonal().iter().map(|d| d * d).sum::<f64>() / n as f64;
        prop_assert!(w2_distance(&s, &z).powi(2) <= bound + 1e-10);
    }
}

#[test]
fn partition_enumerations_have_the_right_sizes() {
    for p in 1..=6 {
        let all = enumerate_pair_partitions(p).unwrap();
        let oe = enumerate_oe_pair_partitions(p).unwrap();
        assert_eq!(BigUint::from(all.len()), pair_partition_count(p));
        assert_eq!(BigUint::from(oe.len()), oe_pair_partition_count(p));
        let full: BTreeSet<Vec<(usize, usize)>> = all.iter().map(|pi| pi.blocks().to_vec()).collect();
        assert_eq!(full.len(), all.len(), "duplicates at p={p}");
        for pi in &all {
            let mut seen: Vec<usize> = pi.blocks().iter().flat_map(|&(r, s)| [r, s]).collect();
            seen.sort_unstable();
            assert_eq!(seen, (1..=2 * p).collect::<Vec<_>>());
            assert!(pi.blocks().iter().all(|&(r, s)| r < s));
            assert!(pi.blocks().windows(2).all(|w| w[0].0 < w[1].0));
        }
        for pi in &oe {
            assert!(pi.is_odd_even());
            assert!(full.contains(&pi.blocks().to_vec()));
        }
        if p >= 2 {
            assert!(oe.len() < all.len());
        }
    }
}

#[test]
fn sign_flip_is_a_bijection_on_small_boxes() {
    for p in 1..=2 {
        for m in 0..=2i64 {
            let h = 2 * p;
            let side = (2 * m + 1) as usize;
            let mut plain = 0;
            for code in 0..side.pow(h as u32) {
                let mut c = code;
                let d: Vec<i64> = (0..h)
                    .map(|_| {
                        let v = (c % side) as i64 - m;
                        c /= side;
                        v
                    })
                    .collect();
                let v = OffsetVector::new(m as usize, d).unwrap();
                let flipped = v.flip_odd_positions();
                assert_eq!(v.sum() == 0, flipped.alternating_sum() == 0);
                assert_eq!(flipped.flip_odd_positions(), v);
                plain += usize::from(v.sum() == 0);
            }
            assert_eq!(BigUint::from(plain), card_g_t(p, m as usize).unwrap());
        }
    }
}

#[test]
fn card_g_h_matches_exhaustive_p3_m2() {
    assert_eq!(card_g_h(3, 2).unwrap(), card_g_bruteforce(3, 2, true, DEFAULT_ENUMERATION_BUDGET).unwrap());
}

#[test]
fn monte_carlo_and_grid_cross_validate_up_to_p4() {
    let sides = [0, 200, 64, 24, 12];
    for kind in [MatrixKind::Toeplitz, MatrixKind::Hankel] {
        for p in 1..=4 {
            let mc = gamma(kind, p, Integrator::MonteCarlo { samples: 100_000, seed: 3 }).unwrap();
            let grid = gamma(kind, p, Integrator::RiemannGrid { side: sides[p] }).unwrap();
            assert!(
                (mc.value - grid.value).abs() <= 3.0 * mc.std_error + grid.bias_bound,
                "{kind} p={p}: {mc:?} {grid:?}"
            );
            for g in [&mc, &grid] {
                assert!(g.value >= 0.0 && g.value <= gamma_upper_bound(kind, p));
            }
        }
    }
}

#[test]
fn m0_moments_reduce_to_gamma() {
    let plan = GammaPlan::monte_carlo(4).with_budget(10_000);
    for kind in [MatrixKind::Toeplitz, MatrixKind::Hankel] {
        let r = beta_sequence(kind, 0, 6, &plan).unwrap();
        for p in 1..=3 {
            let row = r.row(2 * p).unwrap();
            assert_eq!(row.cardinality.as_ref().unwrap(), &BigUint::one());
            assert_eq!(row.beta, gamma(kind, p, plan.integrator(p)).unwrap().value);
        }
    }
}

fn q(v: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

fn det_exact(mut a: Vec<Vec<BigRational>>) -> BigRational {
    let n = a.len();
    let mut det = BigRational::one();
    for c in 0..n {
        let Some(p) = (c..n).find(|&r| !a[r][c].is_zero()) else {
            return BigRational::zero();
        };
        if p != c {
            a.swap(p, c);
            det = -det;
        }
        det *= a[c][c].clone();
        for r in c + 1..n {
            let f = &a[r][c] / &a[c][c];
            for k in c..n {
                let v = &f * &a[c][k];
                a[r][k] -= v;
            }
        }
    }
    det
}

/// Power sums of the eigenvalues from the characteristic polynomial
/// (interpolated from exact determinants) through Newton's identities.
fn eigen_power_sums_exact(a: &[Vec<i64>], h_max: usize) -> Vec<BigRational> {
    let n = a.len();
    // values of det(x I - A) at x = 0..=n
    let points: Vec<(i64, BigRational)> = (0..=n as i64)
        .map(|x| {
            let m = (0..n)
                .map(|i| (0..n).map(|j| q(if i == j { x } else { 0 } - a[i][j])).collect())
                .collect();
            (x, det_exact(m))
        })
        .collect();
    // Lagrange interpolation into monomial coefficients c[0..=n]
    let mut coeffs = vec![BigRational::zero(); n + 1];
    for (k, (xk, yk)) in points.iter().enumerate() {
        let mut basis = vec![BigRational::one()];
        let mut denom = BigRational::one();
        for (j, (xj, _)) in points.iter().enumerate() {
            if j == k {
                continue;
            }
            let mut next = vec![BigRational::zero(); basis.len() + 1];
            for (d, b) in basis.iter().enumerate() {
                next[d + 1] += b.clone();
                next[d] -= b * q(*xj);
            }
            basis = next;
            denom *= q(xk - xj);
        }
        for (d, b) in basis.iter().enumerate() {
            coeffs[d] += b * yk / &denom;
        }
    }
    assert_eq!(coeffs[n], BigRational::one());
    // x^n + e1' x^{n-1} + ...: Newton with a_k = coeffs[n-k]
    let a_k = |k: usize| if k <= n { coeffs[n - k].clone() } else { BigRational::zero() };
    let mut p = vec![q(n as i64)];
    for k in 1..=h_max {
        let mut s = -q(k as i64) * a_k(k);
        for i in 1..k {
            s -= a_k(i) * &p[k - i];
        }
        p.push(s);
    }
    p
}

#[test]
fn integer_five_by_five_paths_agree_exactly() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(31);
    for _ in 0..10 {
        let n = 5;
        let mut a = vec![vec![0i64; n]; n];
        for i in 0..n {
            for j in 0..=i {
                let v = rng.random_range(-4..=4);
                a[i][j] = v;
                a[j][i] = v;
            }
        }
        let flat: Vec<f64> = a.iter().flatten().map(|&v| v as f64).collect();
        let newton = eigen_power_sums_exact(&a, 8);
        let ev = symmetric_eigenvalues(&flat, n).unwrap();
        let eig = power_moments(&ev, 8);
        for h in 1..=8 {
            // integer matrix powers stay below 2^53, so the dense path is exact here
            let dense = dense_power_trace(&flat, n, h);
            assert_eq!(q(dense as i64), newton[h], "h={h}");
            let exact = newton[h].to_f64().unwrap() / n as f64;
            let scale = ev.iter().map(|l| l.abs().powi(h as i32)).sum::<f64>() / n as f64;
            assert!((eig[h] - exact).abs() <= 1e-10 * scale.max(1.0), "h={h}");
            assert!(newton[h].is_integer() && !newton[h].is_negative() || h % 2 == 1);
        }
    }
}

fn fixed_operator(kind: MatrixKind, n: usize) -> (PatternedMatrix, StructuredOperator) {
    let y = MovingAverageProcess::new(1, EntryDistribution::StandardNormal, 12).realize(n).unwrap();
    let mat = build(kind, &y, n).unwrap();
    let op = StructuredOperator::new(&mat).unwrap();
    (mat, op)
}

#[test]
fn hutchinson_is_unbiased_and_scales() {
    for kind in [MatrixKind::Toeplitz, MatrixKind::Hankel] {
        let (mat, op) = fixed_operator(kind, 128);
        let exact = mat.entries().iter().map(|x| x * x).sum::<f64>() / 128.0;
        let runs: Vec<(f64, f64)> = (0..200).map(|s| hutchinson_moment(&op, 2, 8, s).unwrap()).collect();
        let mean = runs.iter().map(|r| r.0).sum::<f64>() / 200.0;
        let pooled = (runs.iter().map(|r| r.1 * r.1).sum::<f64>() / 200.0).sqrt() / 200f64.sqrt();
        assert!((mean - exact).abs() <= 3.0 * pooled, "{kind}: {mean} vs {exact} (se {pooled})");

        let (single, se1) = hutchinson_moment(&op, 2, 400, 1).unwrap();
        let (_, se2) = hutchinson_moment(&op, 2, 800, 1).unwrap();
        let ratio = se2 / se1;
        assert!((ratio * 2f64.sqrt() - 1.0).abs() <= 0.3, "{kind}: ratio {ratio}");
        assert!((single - exact).abs() <= 4.0 * se1);
    }
    let (mat, op) = fixed_operator(MatrixKind::Hankel, 256);
    let exact = dense_power_trace(mat.entries(), 256, 4) / 256.0;
    let (est, se) = hutchinson_moment(&op, 4, 64, 5).unwrap();
    assert!((est - exact).abs() <= 4.0 * se);
}

#[test]
fn large_toeplitz_spectrum_is_mostly_in_a_bounded_window() {
    let n = 2000;
    let y = MovingAverageProcess::new(0, EntryDistribution::StandardNormal, 8).realize(n).unwrap();
    let ev = eigenvalues_symmetric(&build(MatrixKind::Toeplitz, &y, n).unwrap()).unwrap();
    let s = esd(&ev, DEFAULT_BINS, 4).unwrap();
    assert!(s.mass_within(-6.0, 6.0) >= 0.999);
    assert_eq!(s.histogram.total(), n as u64);
}

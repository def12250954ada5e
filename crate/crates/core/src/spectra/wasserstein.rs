use super::esd::EsdSummary;

/// Points per unit of the larger sample size on the quantile grid used when
/// sample sizes differ.
pub const QUANTILE_OVERSAMPLE: usize = 4;

/// One-dimensional W2 between two sorted samples via the quantile coupling.
/// Equal sizes pair order statistics exactly; otherwise the piecewise-constant
/// quantile functions are compared at the midpoints of a uniform grid with
/// `QUANTILE_OVERSAMPLE * max(len)` cells, which is exact up to the grid's
/// resolution of the jump points.
pub fn w2_sorted(a: &[f64], b: &[f64]) -> f64 {
    assert!(!a.is_empty() && !b.is_empty(), "W2 of an empty sample");
    if a.len() == b.len() {
        let sq: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum();
        return (sq / a.len() as f64).sqrt();
    }
    let cells = QUANTILE_OVERSAMPLE * a.len().max(b.len());
    let quantile = |s: &[f64], u: f64| s[((u * s.len() as f64) as usize).min(s.len() - 1)];
    let sq: f64 = (0..cells)
        .map(|k| {
            let u = (k as f64 + 0.5) / cells as f64;
            (quantile(a, u) - quantile(b, u)).powi(2)
        })
        .sum();
    (sq / cells as f64).sqrt()
}

pub fn w2_distance(a: &EsdSummary, b: &EsdSummary) -> f64 {
    w2_sorted(&a.eigenvalues, &b.eigenvalues)
}

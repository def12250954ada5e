//! Dense symmetric eigensolver: Householder reduction to tridiagonal form,
//! then implicit QL with Wilkinson-type shifts.

use crate::error::{LabError, Result};

/// Eigen-decomposition result; `vectors` is row-major with eigenvector `k` in column `k`.
#[derive(Debug, Clone)]
pub struct Eigen {
    pub values: Vec<f64>,
    pub vectors: Option<Vec<f64>>,
}

const MAX_SWEEPS: usize = 60;

fn check_finite(a: &[f64], n: usize) -> Result<()> {
    if a.len() != n * n {
        return Err(LabError::invalid(format!(
            "expected {} entries for a {n}x{n} matrix, got {}",
            n * n,
            a.len()
        )));
    }
    match a.iter().position(|v| !v.is_finite()) {
        Some(idx) => Err(LabError::NumericInput {
            row: idx / n,
            col: idx % n,
        }),
        None => Ok(()),
    }
}

/// Ascending eigenvalues of the symmetric row-major matrix `a`.
pub fn symmetric_eigenvalues(a: &[f64], n: usize) -> Result<Vec<f64>> {
    Ok(decompose(a, n, false)?.values)
}

/// Ascending eigenvalues with matching orthonormal eigenvectors.
pub fn symmetric_eigen(a: &[f64], n: usize) -> Result<Eigen> {
    decompose(a, n, true)
}

fn decompose(a: &[f64], n: usize, vectors: bool) -> Result<Eigen> {
    check_finite(a, n)?;
    if n == 0 {
        return Err(LabError::invalid("empty matrix"));
    }
    let mut z = a.to_vec();
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    tridiagonalize(&mut z, n, &mut d, &mut e, vectors);
    ql_implicit(&mut d, &mut e, n, if vectors { Some(&mut z) } else { None })?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[i].total_cmp(&d[j]));
    let values = order.iter().map(|&i| d[i]).collect();
    let vectors = vectors.then(|| {
        let mut out = vec![0.0; n * n];
        for (col, &src) in order.iter().enumerate() {
            for row in 0..n {
                out[row * n + col] = z[row * n + src];
            }
        }
        out
    });
    Ok(Eigen { values, vectors })
}

/// Householder reduction using the lower triangle. On return `d` holds the
/// diagonal, `e[1..]` the subdiagonal, and `z` the accumulated transform when
/// `vectors` is set.
fn tridiagonalize(z: &mut [f64], n: usize, d: &mut [f64], e: &mut [f64], vectors: bool) {
    let mut u = vec![0.0; n];
    for i in (1..n).rev() {
        let l = i - 1;
        let mut h = 0.0;
        if l > 0 {
            let scale: f64 = z[i * n..i * n + i].iter().map(|v| v.abs()).sum();
            if scale == 0.0 {
                e[i] = z[i * n + l];
            } else {
                for k in 0..i {
                    z[i * n + k] /= scale;
                    h += z[i * n + k] * z[i * n + k];
                }
                let f = z[i * n + l];
                let g = if f >= 0.0 { -h.sqrt() } else { h.sqrt() };
                e[i] = scale * g;
                h -= f * g;
                z[i * n + l] = f - g;
                u[..i].copy_from_slice(&z[i * n..i * n + i]);

                // e[0..i] = A u / h, reading A's lower triangle row by row
                e[..i].fill(0.0);
                for j in 0..i {
                    let row = &z[j * n..j * n + j + 1];
                    let uj = u[j];
                    let mut acc = row[j] * uj;
                    for k in 0..j {
                        acc += row[k] * u[k];
                        e[k] += row[k] * uj;
                    }
                    e[j] += acc;
                }
                let mut f = 0.0;
                for j in 0..i {
                    if vectors {
                        z[j * n + i] = u[j] / h;
                    }
                    e[j] /= h;
                    f += e[j] * u[j];
                }
                let hh = f / (h + h);
                for j in 0..i {
                    let f = u[j];
                    let g = e[j] - hh * f;
                    e[j] = g;
                    let row = &mut z[j * n..j * n + j + 1];
                    for k in 0..=j {
                        row[k] -= f * e[k] + g * u[k];
                    }
                }
            }
        } else {
            e[i] = z[i * n + l];
        }
        d[i] = h;
    }
    d[0] = 0.0;
    e[0] = 0.0;
    for i in 0..n {
        if vectors {
            if d[i] != 0.0 {
                for j in 0..i {
                    let mut g = 0.0;
                    for k in 0..i {
                        g += z[i * n + k] * z[k * n + j];
                    }
                    for k in 0..i {
                        z[k * n + j] -= g * z[k * n + i];
                    }
                }
            }
            d[i] = z[i * n + i];
            z[i * n + i] = 1.0;
            for j in 0..i {
                z[j * n + i] = 0.0;
                z[i * n + j] = 0.0;
            }
        } else {
            d[i] = z[i * n + i];
        }
    }
}

/// Implicit QL on the tridiagonal `(d, e)`, with `e[1..]` the subdiagonal.
fn ql_implicit(d: &mut [f64], e: &mut [f64], n: usize, mut z: Option<&mut [f64]>) -> Result<()> {
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;
    for l in 0..n {
        let mut sweeps = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            sweeps += 1;
            if sweeps > MAX_SWEEPS {
                return Err(LabError::NoConvergence { index: l });
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut deflated = false;
            for i in (l..m).rev() {
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                if let Some(z) = z.as_deref_mut() {
                    for k in 0..n {
                        let f = z[k * n + i + 1];
                        z[k * n + i + 1] = s * z[k * n + i] + c * f;
                        z[k * n + i] = c * z[k * n + i] - s * f;
                    }
                }
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

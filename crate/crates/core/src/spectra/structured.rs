//! O(n log n) products with Toeplitz and Hankel matrices through a circulant
//! embedding. A Hankel product reverses the input and applies the Toeplitz
//! matrix `T[i][k] = Y_{k-i}`.

use std::sync::Arc;

use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::ensemble::{MatrixKind, PatternedMatrix};
use crate::error::{LabError, Result};

pub struct StructuredOperator {
    kind: MatrixKind,
    n: usize,
    len: usize,
    /// FFT of the circulant's first column, pre-divided by `len`.
    spectrum: Vec<Complex64>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    /// Dense column oracle: `t(d)` for `d` in `[-(n-1), n-1]`, scaled.
    taps: Vec<f64>,
}

impl std::fmt::Debug for StructuredOperator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("StructuredOperator")
            .field("kind", &self.kind)
            .field("n", &self.n)
            .field("len", &self.len)
            .finish()
    }
}

impl StructuredOperator {
    /// Operator for `matrix`. A zeroed-diagonal Toeplitz matrix is still
    /// Toeplitz; a zeroed-diagonal Hankel matrix is not, and is rejected.
    pub fn new(matrix: &PatternedMatrix) -> Result<Self> {
        let n = matrix.n();
        let kind = matrix.kind();
        let gen = matrix.generator();
        let scale = matrix.scale();
        let top = n as i64 - 1;
        // taps[d + n - 1] = t_d with (T v)_i = sum_k t_{k-i} v_k
        let mut taps = vec![0.0; 2 * n - 1];
        for d in -top..=top {
            let y = match kind {
                MatrixKind::Toeplitz => gen.at(d.abs())?,
                MatrixKind::Hankel => gen.at(d)?,
            };
            taps[(d + top) as usize] = y * scale;
        }
        if matrix.is_derived() {
            match kind {
                MatrixKind::Toeplitz => taps[top as usize] = 0.0,
                MatrixKind::Hankel => {
                    return Err(LabError::invalid(
                        "a Hankel matrix with zeroed diagonal has no Hankel structure",
                    ))
                }
            }
        }
        Ok(Self::from_taps(kind, n, taps))
    }

    fn from_taps(kind: MatrixKind, n: usize, taps: Vec<f64>) -> Self {
        let len = (2 * n).next_power_of_two();
        let mut planner = FftPlanner::<f64>::new();
        let forward = planner.plan_fft_forward(len);
        let inverse = planner.plan_fft_inverse(len);
        let top = n - 1;
        let mut col = vec![Complex64::new(0.0, 0.0); len];
        // c_r = t_{-r}, c_{len-r} = t_r
        for r in 0..n {
            col[r].re = taps[top - r];
        }
        for r in 1..n {
            col[len - r].re = taps[top + r];
        }
        forward.process(&mut col);
        let inv_len = 1.0 / len as f64;
        let spectrum = col.into_iter().map(|c| c * inv_len).collect();
        StructuredOperator {
            kind,
            n,
            len,
            spectrum,
            forward,
            inverse,
            taps,
        }
    }

    pub fn kind(&self) -> MatrixKind {
        self.kind
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Length of the circulant embedding.
    pub fn embedding_len(&self) -> usize {
        self.len
    }

    /// Column `j` of the dense matrix, read directly from the generator.
    pub fn column(&self, j: usize) -> Vec<f64> {
        let top = self.n as i64 - 1;
        (0..self.n)
            .map(|i| {
                // Hankel column j is Toeplitz column n-1-j of the reversed problem
                let k = match self.kind {
                    MatrixKind::Toeplitz => j as i64,
                    MatrixKind::Hankel => top - j as i64,
                };
                self.taps[(k - i as i64 + top) as usize]
            })
            .collect()
    }

    /// `M v`.
    pub fn fast_matvec(&self, v: &[f64]) -> Result<Vec<f64>> {
        self.check_len(v)?;
        let mut buf = vec![Complex64::new(0.0, 0.0); self.len];
        let mut scratch = self.scratch();
        Ok(self.apply_pair(v, None, &mut buf, &mut scratch).0)
    }

    /// `(M a, M b)` with a single complex transform pair.
    pub fn fast_matvec_pair(&self, a: &[f64], b: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        self.check_len(a)?;
        self.check_len(b)?;
        let mut buf = vec![Complex64::new(0.0, 0.0); self.len];
        let mut scratch = self.scratch();
        let (ma, mb) = self.apply_pair(a, Some(b), &mut buf, &mut scratch);
        Ok((ma, mb.expect("second vector supplied")))
    }

    fn check_len(&self, v: &[f64]) -> Result<()> {
        if v.len() != self.n {
            return Err(LabError::invalid(format!(
                "vector length {} does not match operator size {}",
                v.len(),
                self.n
            )));
        }
        Ok(())
    }

    fn scratch(&self) -> Vec<Complex64> {
        let need = self
            .forward
            .get_inplace_scratch_len()
            .max(self.inverse.get_inplace_scratch_len());
        vec![Complex64::new(0.0, 0.0); need]
    }

    fn apply_pair(
        &self,
        a: &[f64],
        b: Option<&[f64]>,
        buf: &mut [Complex64],
        scratch: &mut [Complex64],
    ) -> (Vec<f64>, Option<Vec<f64>>) {
        let n = self.n;
        buf.fill(Complex64::new(0.0, 0.0));
        for k in 0..n {
            let src = match self.kind {
                MatrixKind::Toeplitz => k,
                MatrixKind::Hankel => n - 1 - k,
            };
            buf[k] = Complex64::new(a[src], b.map_or(0.0, |b| b[src]));
        }
        self.forward.process_with_scratch(buf, scratch);
        for (x, s) in buf.iter_mut().zip(&self.spectrum) {
            *x *= s;
        }
        self.inverse.process_with_scratch(buf, scratch);
        let ma = buf[..n].iter().map(|c| c.re).collect();
        let mb = b.map(|_| buf[..n].iter().map(|c| c.im).collect());
        (ma, mb)
    }

    /// Exact `(1/n) Tr M^h` for `h = 1..=h_max`, from
    /// `Tr M^h = sum_j <M^a e_j, M^b e_j>` with `a = floor(h/2)`, `b = h - a`.
    pub fn trace_moments(&self, h_max: usize) -> Result<Vec<f64>> {
        if h_max == 0 {
            return Err(LabError::invalid("h_max must be positive"));
        }
        let n = self.n;
        let depth = h_max.div_ceil(2);
        let pairs: Vec<usize> = (0..n).step_by(2).collect();
        let partial: Vec<Vec<f64>> = pairs
            .par_iter()
            .map_init(
                || (vec![Complex64::new(0.0, 0.0); self.len], self.scratch()),
                |(buf, scratch), &j| {
                    let mut acc = vec![0.0; h_max + 1];
                    let second = (j + 1 < n).then_some(j + 1);
                    // powers[k] = (M^k e_j, M^k e_{j+1}) for k = 1..=depth
                    let mut pa = vec![self.column(j)];
                    let mut pb = vec![second.map(|c| self.column(c)).unwrap_or_default()];
                    for _ in 1..depth {
                        let (x, y) = self.apply_pair(
                            pa.last().unwrap(),
                            second.map(|_| pb.last().unwrap().as_slice()),
                            buf,
                            scratch,
                        );
                        pa.push(x);
                        if let Some(y) = y {
                            pb.push(y);
                        }
                    }
                    for h in 1..=h_max {
                        let a = h / 2;
                        let b = h - a;
                        acc[h] += column_term(&pa, j, a, b);
                        if let Some(c) = second {
                            acc[h] += column_term(&pb, c, a, b);
                        }
                    }
                    acc
                },
            )
            .collect();
        let mut totals = vec![0.0; h_max + 1];
        for acc in &partial {
            for (t, v) in totals.iter_mut().zip(acc) {
                *t += v;
            }
        }
        Ok(totals[1..].iter().map(|t| t / n as f64).collect())
    }
}

/// `<M^a e_j, M^b e_j>` given `powers[k-1] = M^k e_j`.
fn column_term(powers: &[Vec<f64>], j: usize, a: usize, b: usize) -> f64 {
    match a {
        0 => powers[b - 1][j],
        _ => powers[a - 1]
            .iter()
            .zip(&powers[b - 1])
            .map(|(x, y)| x * y)
            .sum(),
    }
}

//! Symmetric tridiagonal matrices: Sturm bisection and inverse iteration.

use super::{random_unit_vector, seeded_rng, EigenOptions};
use crate::error::Result;
use crate::sparse::SymmetricMatrix;

pub(crate) struct Tridiagonal {
    diag: Vec<f64>,
    off: Vec<f64>,
}

impl Tridiagonal {
    pub(crate) fn new(diag: Vec<f64>, off: Vec<f64>) -> Self {
        debug_assert_eq!(off.len() + 1, diag.len());
        Tridiagonal { diag, off }
    }

    /// The `m` lowest eigenvalues, bracketed in `[lo, hi]`, to absolute width `width`.
    pub(crate) fn lowest_values(&self, m: usize, lo: f64, hi: f64, width: f64) -> Vec<f64> {
        (0..m)
            .map(|k| {
                let (mut a, mut b) = (lo, hi);
                loop {
                    let mid = 0.5 * (a + b);
                    if b - a <= width.max(4.0 * f64::EPSILON * a.abs().max(b.abs()))
                        || mid <= a
                        || mid >= b
                    {
                        break;
                    }
                    if self.sturm_count(mid) > k {
                        b = mid;
                    } else {
                        a = mid;
                    }
                }
                0.5 * (a + b)
            })
            .collect()
    }

    fn from_matrix(a: &SymmetricMatrix) -> Self {
        let n = a.n();
        Tridiagonal {
            diag: a.diagonal(),
            off: (0..n.saturating_sub(1)).map(|i| a.get(i, i + 1)).collect(),
        }
    }

    /// Number of eigenvalues below `x`.
    pub(crate) fn sturm_count(&self, x: f64) -> usize {
        let tiny = f64::MIN_POSITIVE.sqrt();
        let mut count = 0;
        let mut d = 1.0;
        for (i, &a) in self.diag.iter().enumerate() {
            let b2 = if i == 0 {
                0.0
            } else {
                self.off[i - 1] * self.off[i - 1]
            };
            d = a - x - b2 / d;
            if d == 0.0 {
                d = -tiny;
            }
            if d < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// Solves `(T − λI)x = rhs` by Gaussian elimination with partial pivoting.
    fn shifted_solve(&self, lambda: f64, rhs: &mut [f64]) {
        let n = self.diag.len();
        let scale = self
            .diag
            .iter()
            .fold(0.0f64, |m, x| m.max((x - lambda).abs()))
            + 2.0 * self.off.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let floor = f64::EPSILON * scale.max(f64::MIN_POSITIVE);
        let mut d: Vec<f64> = self.diag.iter().map(|x| x - lambda).collect();
        let mut dl = self.off.clone();
        let mut du = self.off.clone();
        let mut du2 = vec![0.0; n.saturating_sub(2)];
        let mut swapped = vec![false; n.saturating_sub(1)];
        for i in 0..n.saturating_sub(1) {
            if d[i].abs() >= dl[i].abs() {
                if d[i] == 0.0 {
                    d[i] = floor;
                }
                let fact = dl[i] / d[i];
                dl[i] = fact;
                d[i + 1] -= fact * du[i];
            } else {
                let fact = d[i] / dl[i];
                d[i] = dl[i];
                dl[i] = fact;
                let temp = du[i];
                du[i] = d[i + 1];
                d[i + 1] = temp - fact * d[i + 1];
                if i + 2 < n {
                    du2[i] = du[i + 1];
                    du[i + 1] *= -fact;
                }
                swapped[i] = true;
            }
        }
        if d[n - 1] == 0.0 {
            d[n - 1] = floor;
        }
        for i in 0..n.saturating_sub(1) {
            if swapped[i] {
                let temp = rhs[i];
                rhs[i] = rhs[i + 1];
                rhs[i + 1] = temp - dl[i] * rhs[i];
            } else {
                rhs[i + 1] -= dl[i] * rhs[i];
            }
        }
        rhs[n - 1] /= d[n - 1];
        if n > 1 {
            rhs[n - 2] = (rhs[n - 2] - du[n - 2] * rhs[n - 1]) / d[n - 2];
        }
        for i in (0..n.saturating_sub(2)).rev() {
            rhs[i] = (rhs[i] - du[i] * rhs[i + 1] - du2[i] * rhs[i + 2]) / d[i];
        }
    }
}

/// The `m` lowest eigenpairs of a tridiagonal matrix, all below `upper`.
pub(super) fn lowest(
    a: &SymmetricMatrix,
    m: usize,
    upper: f64,
    opts: EigenOptions,
) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let t = Tridiagonal::from_matrix(a);
    let n = t.diag.len();
    let floor = a.gershgorin_lower();
    let values = t.lowest_values(m, floor, upper, 1e-3 * opts.tol);
    let mut rng = seeded_rng(opts.seed);
    let cluster = 1e-7 * (a.gershgorin_upper() - floor).abs().max(1.0);
    let mut vectors: Vec<Vec<f64>> = Vec::with_capacity(m);
    for (k, &lambda) in values.iter().enumerate() {
        let mut x = random_unit_vector(n, &mut rng);
        for _ in 0..4 {
            t.shifted_solve(lambda, &mut x);
            for (j, v) in vectors.iter().enumerate() {
                if (values[j] - lambda).abs() < cluster {
                    let c: f64 = v.iter().zip(&x).map(|(p, q)| p * q).sum();
                    x.iter_mut().zip(v).for_each(|(p, q)| *p -= c * q);
                }
            }
            let nx = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            x.iter_mut().for_each(|v| *v /= nx);
        }
        debug_assert_eq!(vectors.len(), k);
        vectors.push(x);
    }
    Ok((values, vectors))
}

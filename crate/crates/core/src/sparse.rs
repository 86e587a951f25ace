//! Symmetric sparse matrices in compressed-row storage (both triangles kept)
//! and a banded `LDLᵀ` factorisation whose pivot signs give the inertia.

use std::collections::BTreeMap;
use std::io::{self, Write};

use crate::error::{Error, Result};

/// Accumulates symmetric contributions before compression.
#[derive(Clone, Debug)]
pub struct SymmetricBuilder {
    n: usize,
    rows: Vec<BTreeMap<usize, f64>>,
}

impl SymmetricBuilder {
    pub fn new(n: usize) -> Self {
        SymmetricBuilder {
            n,
            rows: vec![BTreeMap::new(); n],
        }
    }

    pub fn add_diag(&mut self, i: usize, v: f64) {
        *self.rows[i].entry(i).or_insert(0.0) += v;
    }

    /// Adds `v` at `(i, j)` and `(j, i)` (once if `i == j`).
    pub fn add_sym(&mut self, i: usize, j: usize, v: f64) {
        if i == j {
            self.add_diag(i, v);
        } else {
            *self.rows[i].entry(j).or_insert(0.0) += v;
            *self.rows[j].entry(i).or_insert(0.0) += v;
        }
    }

    pub fn build(mut self) -> SymmetricMatrix {
        let mut row_ptr = Vec::with_capacity(self.n + 1);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        for (i, row) in self.rows.iter_mut().enumerate() {
            // an explicit diagonal keeps every row non-empty
            row.entry(i).or_insert(0.0);
            for (&j, &v) in row.iter() {
                col_idx.push(j);
                values.push(v);
            }
            row_ptr.push(col_idx.len());
        }
        SymmetricMatrix {
            n: self.n,
            row_ptr,
            col_idx,
            values,
        }
    }
}

/// Real symmetric matrix; both triangles are stored so that products are
/// a single pass over the rows.
#[derive(Clone, Debug, PartialEq)]
pub struct SymmetricMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl SymmetricMatrix {
    pub fn from_diagonal(d: &[f64]) -> Self {
        let mut b = SymmetricBuilder::new(d.len());
        for (i, &v) in d.iter().enumerate() {
            b.add_diag(i, v);
        }
        b.build()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Column indices and values of row `i`, columns ascending.
    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        (&self.col_idx[r.clone()], &self.values[r])
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (cols, vals) = self.row(i);
        cols.binary_search(&j).map_or(0.0, |p| vals[p])
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    /// `y = A x`.
    pub fn mul_vec(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate().take(self.n) {
            let (cols, vals) = self.row(i);
            *yi = cols.iter().zip(vals).map(|(&j, &v)| v * x[j]).sum();
        }
    }

    /// True when every stored entry equals its mirror bit for bit.
    pub fn is_symmetric(&self) -> bool {
        (0..self.n).all(|i| {
            let (cols, vals) = self.row(i);
            cols.iter()
                .zip(vals)
                .all(|(&j, &v)| self.get(j, i).to_bits() == v.to_bits())
        })
    }

    /// Gershgorin lower bound on the spectrum.
    pub fn gershgorin_lower(&self) -> f64 {
        (0..self.n)
            .map(|i| {
                let (cols, vals) = self.row(i);
                let mut d = 0.0;
                let mut off = 0.0;
                for (&j, &v) in cols.iter().zip(vals) {
                    if j == i {
                        d = v;
                    } else {
                        off += v.abs();
                    }
                }
                d - off
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// Gershgorin upper bound on the spectrum.
    pub fn gershgorin_upper(&self) -> f64 {
        (0..self.n)
            .map(|i| {
                let (cols, vals) = self.row(i);
                cols.iter()
                    .zip(vals)
                    .map(|(&j, &v)| if j == i { v } else { v.abs() })
                    .sum::<f64>()
            })
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Half-bandwidth `max |i − j|` over stored entries.
    pub fn bandwidth(&self) -> usize {
        (0..self.n)
            .map(|i| {
                let (cols, _) = self.row(i);
                match (cols.first(), cols.last()) {
                    (Some(&a), Some(&b)) => (i.abs_diff(a)).max(i.abs_diff(b)),
                    _ => 0,
                }
            })
            .max()
            .unwrap_or(0)
    }

    pub fn to_dense(&self) -> nalgebra::DMatrix<f64> {
        let mut m = nalgebra::DMatrix::zeros(self.n, self.n);
        for i in 0..self.n {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                m[(i, j)] = v;
            }
        }
        m
    }

    /// Coordinate listing, one `row col value` triple per line (0-based, full pattern).
    pub fn write_coordinate<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "% {} {} {}", self.n, self.n, self.nnz())?;
        for i in 0..self.n {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                writeln!(out, "{i} {j} {v:.17e}")?;
            }
        }
        Ok(())
    }
}

/// `LDLᵀ` factorisation of `A − σI` in band storage, without pivoting.
///
/// Row `i` of `L` is stored densely for columns `i − b .. i` (unit diagonal implied).
#[derive(Clone, Debug)]
pub struct BandLdl {
    n: usize,
    b: usize,
    shift: f64,
    l: Vec<f64>,
    d: Vec<f64>,
}

/// Relative pivot size treated as a breakdown.
const PIVOT_FLOOR: f64 = 1e-14;

impl BandLdl {
    pub fn factor(a: &SymmetricMatrix, shift: f64) -> Result<Self> {
        let n = a.n();
        let b = a.bandwidth();
        let w = b + 1;
        let mut l = vec![0.0; n * w];
        let mut scale = vec![0.0f64; n];
        for i in 0..n {
            let (cols, vals) = a.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                scale[i] += v.abs();
                if j <= i {
                    l[i * w + (j + b - i)] = v;
                }
            }
            l[i * w + b] -= shift;
            scale[i] += shift.abs();
        }
        let mut d = vec![0.0; n];
        let mut u = vec![0.0; w];
        for i in 0..n {
            let lo = i.saturating_sub(b);
            let (head, tail) = l.split_at_mut(i * w);
            let row_i = &mut tail[..w];
            for j in lo..i {
                // row_i[k + b - i] holds L[i,k] for k < j, and A[i,j] at k = j
                let ki = |k: usize| k + b - i;
                let kj = |k: usize| k + b - j;
                let lo_j = j.saturating_sub(b).max(lo);
                let row_j = &head[j * w..j * w + w];
                let s: f64 = u[ki(lo_j)..ki(j)]
                    .iter()
                    .zip(&row_j[kj(lo_j)..kj(j)])
                    .map(|(x, y)| x * y)
                    .sum();
                let lij = (row_i[ki(j)] - s) / d[j];
                row_i[ki(j)] = lij;
                u[ki(j)] = lij * d[j];
            }
            let s: f64 = (lo..i).map(|k| row_i[k + b - i] * u[k + b - i]).sum();
            let di = row_i[b] - s;
            if !(di.abs() > PIVOT_FLOOR * scale[i].max(f64::MIN_POSITIVE)) {
                return Err(Error::Breakdown {
                    shift,
                    row: i,
                    pivot: di,
                });
            }
            d[i] = di;
            row_i[b] = 1.0;
        }
        Ok(BandLdl { n, b, shift, l, d })
    }

    pub fn shift(&self) -> f64 {
        self.shift
    }

    pub fn bandwidth(&self) -> usize {
        self.b
    }

    /// Number of negative pivots, i.e. eigenvalues of `A` below the shift.
    pub fn negative_count(&self) -> usize {
        self.d.iter().filter(|&&x| x < 0.0).count()
    }

    /// Solves `(A − σI) x = rhs` in place.
    pub fn solve_in_place(&self, x: &mut [f64]) {
        let (n, b, w) = (self.n, self.b, self.b + 1);
        for i in 0..n {
            let lo = i.saturating_sub(b);
            let row = &self.l[i * w..i * w + w];
            let s: f64 = row[lo + b - i..b]
                .iter()
                .zip(&x[lo..i])
                .map(|(a, c)| a * c)
                .sum();
            x[i] -= s;
        }
        for (xi, di) in x.iter_mut().zip(&self.d) {
            *xi /= di;
        }
        for i in (0..n).rev() {
            let lo = i.saturating_sub(b);
            let xi = x[i];
            let row = &self.l[i * w..i * w + w];
            for (xk, lk) in x[lo..i].iter_mut().zip(&row[lo + b - i..b]) {
                *xk -= lk * xi;
            }
        }
    }
}

/// Factorises `A − σI`, nudging the shift away from an exact singularity.
/// Returns the factorisation together with the shift actually used.
pub fn factor_with_retry(a: &SymmetricMatrix, shift: f64) -> Result<BandLdl> {
    let scale = a
        .gershgorin_upper()
        .abs()
        .max(a.gershgorin_lower().abs())
        .max(1.0);
    let mut last = None;
    for attempt in 0..4 {
        let sigma =
            shift + attempt as f64 * 1e-11 * scale * if attempt % 2 == 0 { 1.0 } else { -1.0 };
        match BandLdl::factor(a, sigma) {
            Ok(f) => return Ok(f),
            Err(e) => {
                log::debug!("factorisation at shift {sigma} failed: {e}");
                last = Some(e);
            }
        }
    }
    Err(last.unwrap())
}

/// Number of eigenvalues strictly below `shift` (Sylvester's law of inertia).
pub fn inertia_below(a: &SymmetricMatrix, shift: f64) -> Result<usize> {
    Ok(factor_with_retry(a, shift)?.negative_count())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn laplacian_1d(n: usize) -> SymmetricMatrix {
        let mut b = SymmetricBuilder::new(n);
        for i in 0..n {
            b.add_diag(i, 2.0);
            if i + 1 < n {
                b.add_sym(i, i + 1, -1.0);
            }
        }
        b.build()
    }

    fn grid_laplacian(nx: usize, ny: usize) -> SymmetricMatrix {
        let mut b = SymmetricBuilder::new(nx * ny);
        let id = |i: usize, j: usize| j * nx + i;
        for j in 0..ny {
            for i in 0..nx {
                b.add_diag(id(i, j), 4.0 + 0.01 * (i + j) as f64);
                if i + 1 < nx {
                    b.add_sym(id(i, j), id(i + 1, j), -1.0);
                }
                if j + 1 < ny {
                    b.add_sym(id(i, j), id(i, j + 1), -1.0);
                }
            }
        }
        b.build()
    }

    #[test]
    fn builder_and_queries() {
        let a = grid_laplacian(4, 3);
        assert!(a.is_symmetric());
        assert_eq!(a.bandwidth(), 4);
        assert_eq!(a.get(0, 1), -1.0);
        assert_eq!(a.get(0, 2), 0.0);
        let eig = a.to_dense().symmetric_eigenvalues();
        assert!(eig
            .iter()
            .all(|&x| x >= a.gershgorin_lower() && x <= a.gershgorin_upper()));
        let mut out = Vec::new();
        a.write_coordinate(&mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert_eq!(text.lines().count(), a.nnz() + 1);
    }

    #[test]
    fn zero_diagonal_kept_in_pattern() {
        let mut b = SymmetricBuilder::new(3);
        b.add_sym(0, 2, 1.0);
        let a = b.build();
        assert_eq!(a.get(1, 1), 0.0);
        assert_eq!(a.get(2, 0), 1.0);
        assert!(a.row(1).0.contains(&1));
        assert!(a.is_symmetric());
    }

    #[test]
    fn inertia_matches_dense_eigenvalues() {
        let a = grid_laplacian(7, 5);
        let eig = a.to_dense().symmetric_eigenvalues();
        for &sigma in &[0.5, 1.7, 3.3, 4.0, 6.1, 9.0] {
            let want = eig.iter().filter(|&&x| x < sigma).count();
            assert_eq!(inertia_below(&a, sigma).unwrap(), want, "σ = {sigma}");
        }
    }

    #[test]
    fn exact_eigenvalue_shift_breaks_down_then_recovers() {
        // eigenvalues of the 3-point Laplacian with n = 3: 2 − √2, 2, 2 + √2
        let a = laplacian_1d(3);
        assert!(matches!(
            BandLdl::factor(&a, 2.0),
            Err(Error::Breakdown { .. })
        ));
        let c = inertia_below(&a, 2.0).unwrap();
        assert!(c == 1 || c == 2);
    }

    #[test]
    fn solve_matches_dense() {
        let a = grid_laplacian(6, 6);
        let f = BandLdl::factor(&a, 1.234).unwrap();
        let rhs: Vec<f64> = (0..36).map(|i| (i as f64 * 0.37).sin()).collect();
        let mut x = rhs.clone();
        f.solve_in_place(&mut x);
        let mut ax = vec![0.0; 36];
        a.mul_vec(&x, &mut ax);
        for i in 0..36 {
            assert_abs_diff_eq!(ax[i] - 1.234 * x[i], rhs[i], epsilon = 1e-11);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn random_banded_inertia(
            entries in proptest::collection::vec((0usize..20, 0usize..4, -1.0f64..1.0), 10..60),
            diag in proptest::collection::vec(-3.0f64..3.0, 20),
            sigma in -2.0f64..2.0,
        ) {
            let mut b = SymmetricBuilder::new(20);
            for (i, &d) in diag.iter().enumerate() {
                b.add_diag(i, d);
            }
            for &(i, off, v) in &entries {
                let j = (i + off).min(19);
                b.add_sym(i, j, v);
            }
            let a = b.build();
            prop_assert!(a.is_symmetric());
            let eig = a.to_dense().symmetric_eigenvalues();
            let gap = eig.iter().map(|x| (x - sigma).abs()).fold(f64::INFINITY, f64::min);
            prop_assume!(gap > 1e-6);
            let want = eig.iter().filter(|&&x| x < sigma).count();
            prop_assert_eq!(inertia_below(&a, sigma).unwrap(), want);
        }
    }
}

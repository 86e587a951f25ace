//! All eigenvalues below a threshold, with a completeness certificate from the
//! inertia of `A − ΛI`, plus the spectral functionals built on them.

mod density;
mod lanczos;
pub(crate) mod tridiag;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::operators::DiscreteOperator;
use crate::sparse::{factor_with_retry, inertia_below, SymmetricMatrix};

pub use density::{pair_density, projector_density, DensityField, Pairing};

/// Problems up to this size are solved densely.
const DENSE_LIMIT: usize = 400;

/// Solver controls.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EigenOptions {
    /// Absolute bound on `‖Av − λv‖` for unit `v`, hence on each eigenvalue error.
    pub tol: f64,
    pub want_vectors: bool,
    /// Largest number of eigenvalues a single call may return.
    pub max_states: usize,
    pub max_restarts: usize,
    /// Seed of the deterministic start vectors.
    pub seed: u64,
}

impl Default for EigenOptions {
    fn default() -> Self {
        EigenOptions {
            tol: 1e-9,
            want_vectors: false,
            max_states: 2000,
            max_restarts: 400,
            seed: 0x5eed_0001,
        }
    }
}

impl EigenOptions {
    pub fn with_vectors(mut self, want: bool) -> Self {
        self.want_vectors = want;
        self
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }
}

/// Eigenvalues below `threshold` in ascending order.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    /// Unit eigenvectors of the stored (symmetrised) matrix, one per eigenvalue.
    pub eigenvectors: Option<Vec<Vec<f64>>>,
    /// Largest residual `‖Av − λv‖` over the returned pairs.
    pub residual_bound: f64,
    pub threshold: f64,
    /// Negative inertia of `A − σI` at the factorised shift `σ ≈ threshold`.
    pub inertia: usize,
}

impl Spectrum {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// True when the inertia certificate matches the number of eigenvalues.
    pub fn is_certified(&self) -> bool {
        self.inertia == self.eigenvalues.len()
    }
}

/// Counting function with an ambiguity bracket.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CountResult {
    pub count: usize,
    /// `N(Λ − tol)`.
    pub lower: usize,
    /// `N(Λ + tol)`.
    pub upper: usize,
}

impl CountResult {
    pub fn is_sharp(&self) -> bool {
        self.lower == self.upper
    }
}

/// `N(A, Λ) = #{λ < Λ}` together with `N(Λ ∓ tol)`.
pub fn count_below(op: &DiscreteOperator, threshold: f64, tol: f64) -> Result<CountResult> {
    count_matrix_below(op.matrix(), threshold, tol)
}

pub(crate) fn count_matrix_below(
    a: &SymmetricMatrix,
    threshold: f64,
    tol: f64,
) -> Result<CountResult> {
    if !threshold.is_finite() || !(tol >= 0.0) {
        return Err(Error::param(
            "threshold must be finite and tol non-negative",
        ));
    }
    let count = inertia_below(a, threshold)?;
    let (lower, upper) = if tol > 0.0 {
        (
            inertia_below(a, threshold - tol)?,
            inertia_below(a, threshold + tol)?,
        )
    } else {
        (count, count)
    };
    Ok(CountResult {
        count,
        lower: lower.min(count),
        upper: upper.max(count),
    })
}

/// All eigenvalues of `op` below `threshold` (optionally with eigenvectors).
pub fn eigs_below(op: &DiscreteOperator, threshold: f64, opts: EigenOptions) -> Result<Spectrum> {
    eigs_matrix_below(op.matrix(), threshold, opts)
}

pub(crate) fn eigs_matrix_below(
    a: &SymmetricMatrix,
    threshold: f64,
    opts: EigenOptions,
) -> Result<Spectrum> {
    if !threshold.is_finite() {
        return Err(Error::param("threshold must be finite"));
    }
    if !(opts.tol > 0.0) {
        return Err(Error::param("tolerance must be positive"));
    }
    let factor = factor_with_retry(a, threshold)?;
    let m = factor.negative_count();
    if m > opts.max_states {
        return Err(Error::Capacity {
            what: "eigenpairs below threshold",
            requested: m,
            capacity: opts.max_states,
        });
    }
    let (values, vectors) = if m == 0 {
        (Vec::new(), Vec::new())
    } else if a.n() <= DENSE_LIMIT {
        dense_lowest(a, m)
    } else if a.bandwidth() <= 1 {
        tridiag::lowest(a, m, factor.shift(), opts)?
    } else {
        lanczos::shift_invert(a, &factor, m, opts)?
    };
    let mut pairs: Vec<(f64, Vec<f64>)> = values.into_iter().zip(vectors).collect();
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut residual_bound: f64 = 0.0;
    let mut ax = vec![0.0; a.n()];
    for (lambda, v) in pairs.iter_mut() {
        normalise_with_sign(v);
        a.mul_vec(v, &mut ax);
        let r = ax
            .iter()
            .zip(v.iter())
            .map(|(p, q)| (p - *lambda * q).powi(2))
            .sum::<f64>()
            .sqrt();
        residual_bound = residual_bound.max(r);
    }
    if residual_bound > opts.tol {
        return Err(Error::NotConverged(format!(
            "residual {residual_bound:e} exceeds tolerance {:e}",
            opts.tol
        )));
    }
    let (eigenvalues, vecs): (Vec<f64>, Vec<Vec<f64>>) = pairs.into_iter().unzip();
    Ok(Spectrum {
        eigenvalues,
        eigenvectors: opts.want_vectors.then_some(vecs),
        residual_bound,
        threshold,
        inertia: m,
    })
}

fn dense_lowest(a: &SymmetricMatrix, m: usize) -> (Vec<f64>, Vec<Vec<f64>>) {
    let eig = nalgebra::SymmetricEigen::new(a.to_dense());
    let mut order: Vec<usize> = (0..a.n()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    order
        .into_iter()
        .take(m)
        .map(|i| {
            (
                eig.eigenvalues[i],
                eig.eigenvectors.column(i).iter().copied().collect(),
            )
        })
        .unzip()
}

/// Unit norm, first significant component positive.
fn normalise_with_sign(v: &mut [f64]) {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let peak = v.iter().fold(0.0f64, |acc, x| acc.max(x.abs()));
    let sign = v
        .iter()
        .find(|x| x.abs() > 1e-8 * peak)
        .map_or(1.0, |x| x.signum());
    for x in v.iter_mut() {
        *x *= sign / norm;
    }
}

pub(crate) fn random_unit_vector(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mut v: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter_mut().for_each(|x| *x /= norm);
    v
}

pub(crate) fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `Σ_{λ<Λ} (Λ − λ)^γ`; `γ = 0` gives the count.
pub fn riesz_mean(spec: &Spectrum, threshold: f64, gamma: f64) -> Result<f64> {
    if !(gamma >= 0.0) {
        return Err(Error::param(format!("γ must be non-negative, got {gamma}")));
    }
    if threshold > spec.threshold {
        return Err(Error::Integrity(format!(
            "spectrum is complete only below {}, requested {threshold}",
            spec.threshold
        )));
    }
    if !spec.is_certified() {
        return Err(Error::Integrity(
            "spectrum lacks a matching inertia certificate".into(),
        ));
    }
    Ok(spec
        .eigenvalues
        .iter()
        .filter(|&&l| l < threshold)
        .map(|&l| {
            if gamma == 0.0 {
                1.0
            } else {
                (threshold - l).powf(gamma)
            }
        })
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::{assemble_model_1d, EdgeCondition};
    use crate::sparse::SymmetricBuilder;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn diag_op(d: &[f64]) -> DiscreteOperator {
        DiscreteOperator::from_matrix(SymmetricMatrix::from_diagonal(d), "diagonal").unwrap()
    }

    #[test]
    fn diagonal_examples() {
        let op = diag_op(&[1.0, 2.0, 3.0]);
        let s = eigs_below(&op, 2.5, EigenOptions::default()).unwrap();
        assert_eq!(s.eigenvalues, vec![1.0, 2.0]);
        assert!(s.is_certified());
        let c = count_below(&op, 2.5, 1e-9).unwrap();
        assert_eq!((c.count, c.lower, c.upper), (2, 2, 2));
        let c = count_below(&op, 2.0 + 1e-12, 1e-9).unwrap();
        assert_eq!((c.lower, c.upper), (1, 2));
        let empty = eigs_below(&op, 0.5, EigenOptions::default()).unwrap();
        assert!(empty.is_empty());
        assert_eq!(empty.inertia, 0);
        assert_eq!(riesz_mean(&s, 2.5, 1.0).unwrap(), 2.0);
        assert_abs_diff_eq!(riesz_mean(&s, 2.5, 0.5).unwrap(), 1.93185, epsilon = 1e-5);
        assert_eq!(riesz_mean(&s, 2.5, 0.0).unwrap(), 2.0);
        assert!(matches!(riesz_mean(&s, 3.5, 1.0), Err(Error::Integrity(_))));
    }

    #[test]
    fn capacity_cap() {
        let op = diag_op(&[1.0, 2.0, 3.0]);
        let opts = EigenOptions {
            max_states: 1,
            ..EigenOptions::default()
        };
        assert!(matches!(
            eigs_below(&op, 2.5, opts),
            Err(Error::Capacity { .. })
        ));
    }

    #[test]
    fn airy_model_low_eigenvalues() {
        let op = assemble_model_1d(40.0, 4000, EdgeCondition::Dirichlet, |_| 0.0).unwrap();
        let s = eigs_below(&op, 7.0, EigenOptions::default().with_vectors(true)).unwrap();
        let want = [2.33811, 4.08795, 5.52056, 6.78671];
        assert_eq!(s.len(), 4);
        for (got, want) in s.eigenvalues.iter().zip(want) {
            assert_abs_diff_eq!(*got, want, epsilon = 1e-4);
        }
        assert!(s.residual_bound < 1e-9);
    }

    #[test]
    fn laplacian_count() {
        // −h² d²/dx² on (0, 1), eigenvalues h²π²k², h = 0.01
        let n = 2000;
        let dx = 1.0 / n as f64;
        let c = 1e-4 / (dx * dx);
        let mut b = SymmetricBuilder::new(n - 1);
        for i in 0..n - 1 {
            b.add_diag(i, 2.0 * c);
            if i + 1 < n - 1 {
                b.add_sym(i, i + 1, -c);
            }
        }
        let op = DiscreteOperator::from_matrix(b.build(), "laplacian").unwrap();
        assert_eq!(count_below(&op, 4.0, 0.0).unwrap().count, 63);
    }

    fn grid_op(nx: usize, ny: usize) -> DiscreteOperator {
        let mut b = SymmetricBuilder::new(nx * ny);
        let id = |i: usize, j: usize| j * nx + i;
        for j in 0..ny {
            for i in 0..nx {
                let x = i as f64 / nx as f64;
                b.add_diag(id(i, j), 4.0 + x + 0.3 * (j as f64 / ny as f64).powi(2));
                if i + 1 < nx {
                    b.add_sym(id(i, j), id(i + 1, j), -1.0);
                }
                if j + 1 < ny {
                    b.add_sym(id(i, j), id(i, j + 1), -1.0);
                }
            }
        }
        DiscreteOperator::from_matrix(b.build(), "grid").unwrap()
    }

    #[test]
    fn lanczos_matches_dense_on_grid() {
        let op = grid_op(30, 25);
        let dense = op.matrix().to_dense().symmetric_eigenvalues();
        let mut dense: Vec<f64> = dense.iter().copied().collect();
        dense.sort_by(f64::total_cmp);
        let threshold = 0.5 * (dense[11] + dense[12]);
        let s = eigs_below(&op, threshold, EigenOptions::default().with_vectors(true)).unwrap();
        assert_eq!(s.len(), 12);
        for (a, b) in s.eigenvalues.iter().zip(&dense) {
            assert_abs_diff_eq!(*a, *b, epsilon = 1e-9);
        }
        let vecs = s.eigenvectors.as_ref().unwrap();
        for i in 0..vecs.len() {
            for j in 0..i {
                let d: f64 = vecs[i].iter().zip(&vecs[j]).map(|(a, b)| a * b).sum();
                assert!(d.abs() < 1e-8);
            }
        }
    }

    #[test]
    fn deterministic_output() {
        let op = grid_op(30, 25);
        let opts = EigenOptions::default().with_vectors(true);
        let a = eigs_below(&op, 1.0, opts).unwrap();
        let b = eigs_below(&op, 1.0, opts).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn riesz_counting_integral_identity() {
        // Tr(A − Λ)₋ = ∫_{−∞}^{Λ} N(A, λ) dλ on a 1D model
        let op = assemble_model_1d(20.0, 800, EdgeCondition::Dirichlet, |_| 0.0).unwrap();
        let lam = 9.0;
        let s = eigs_below(&op, lam, EigenOptions::default()).unwrap();
        let riesz = riesz_mean(&s, lam, 1.0).unwrap();
        let mut integral = 0.0;
        let mut prev = op.lower_bound().min(s.eigenvalues[0]);
        for (k, &l) in s.eigenvalues.iter().enumerate() {
            integral += k as f64 * (l - prev);
            prev = l;
        }
        integral += s.len() as f64 * (lam - prev);
        assert!(((riesz - integral) / riesz).abs() < 1e-8);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn count_monotone_in_threshold(a in 0.0f64..10.0, b in 0.0f64..10.0) {
            let op = assemble_model_1d(20.0, 400, EdgeCondition::Dirichlet, |_| 0.0).unwrap();
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            let cl = count_below(&op, lo, 0.0).unwrap().count;
            let ch = count_below(&op, hi, 0.0).unwrap().count;
            prop_assert!(cl <= ch);
            let sh = eigs_below(&op, hi, EigenOptions::default()).unwrap();
            let rl = riesz_mean(&sh, lo, 1.0).unwrap();
            let rh = riesz_mean(&sh, hi, 1.0).unwrap();
            prop_assert!(rl <= rh + 1e-12);
        }
    }
}

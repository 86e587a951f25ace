//! Shift-invert Lanczos with thick restarts.
//!
//! The spectrum below the threshold is cut into slices `[a, b)` holding at most
//! `SLICE` eigenvalues each (counts from inertia). Each slice is solved with the
//! shift `σ = a` placed at its bottom: `(A − σI)^{-1}` is applied through a
//! banded `LDLᵀ` and the wanted eigenvalues are its `m` largest `θ`, with
//! `λ = σ + 1/θ`. A shift at the top of the slice would make the lowest
//! eigenvalues interior points of the transformed spectrum.

use nalgebra::{DMatrix, SymmetricEigen};

use super::{random_unit_vector, seeded_rng, EigenOptions};
use crate::error::{Error, Result};
use crate::sparse::{factor_with_retry, BandLdl, SymmetricMatrix};

/// Target number of eigenvalues per slice.
const SLICE: usize = 48;
/// Restarts without progress before a fresh direction is injected.
const STALL_LIMIT: usize = 8;

pub(super) fn shift_invert(
    a: &SymmetricMatrix,
    factor: &BandLdl,
    m: usize,
    opts: EigenOptions,
) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let top = (factor.shift(), m);
    let floor = a.gershgorin_lower();
    let mut bottom = floor - 1e-3 * (top.0 - floor).abs().max(f64::MIN_POSITIVE);
    // Gershgorin can sit far below λ₁ (scaled Neumann rows); tighten by inertia
    let mut above = top.0;
    for _ in 0..60 {
        if above - bottom <= 0.1 * (top.0 - bottom) {
            break;
        }
        let mid = 0.5 * (bottom + above);
        if factor_with_retry(a, mid)?.negative_count() == 0 {
            bottom = mid;
        } else {
            above = mid;
        }
    }
    // shifts s_0 < s_1 < … < σ with at most SLICE eigenvalues in each [s_i, s_{i+1})
    let mut cuts: Vec<(f64, usize)> = vec![(bottom, 0)];
    loop {
        let (lo_shift, lo_count) = *cuts.last().unwrap();
        if top.1 - lo_count <= SLICE {
            cuts.push(top);
            break;
        }
        let (mut lo, mut hi) = (lo_shift, top.0);
        let mut best: Option<(f64, usize)> = None;
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            let f = factor_with_retry(a, mid)?;
            let c = f.negative_count();
            let gained = c - lo_count;
            if gained > SLICE {
                hi = mid;
            } else {
                if gained > 0 && best.is_none_or(|b| c > b.1) {
                    best = Some((f.shift(), c));
                }
                if gained >= SLICE / 2 {
                    break;
                }
                lo = mid;
            }
        }
        let next = best.ok_or_else(|| {
            Error::NotConverged("could not place a spectrum slice boundary".into())
        })?;
        cuts.push(next);
    }
    log::debug!("spectrum split into {} slices", cuts.len() - 1);
    let mut values = Vec::with_capacity(m);
    let mut vectors = Vec::with_capacity(m);
    for (idx, pair) in cuts.windows(2).enumerate() {
        let (lo_shift, lo_count) = pair[0];
        let (hi_shift, hi_count) = pair[1];
        let want = hi_count - lo_count;
        if want == 0 {
            continue;
        }
        let f = factor_with_retry(a, lo_shift)?;
        let (v, x) = krylov_schur(
            a,
            &f,
            want,
            hi_shift,
            opts,
            opts.seed.wrapping_add(idx as u64),
        )?;
        values.extend(v);
        vectors.extend(x);
    }
    Ok((values, vectors))
}

fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

fn norm(x: &[f64]) -> f64 {
    dot(x, x).sqrt()
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    y.iter_mut().zip(x).for_each(|(b, a)| *b += alpha * a);
}

/// Classical Gram–Schmidt against `basis`, applied twice; returns the coefficients.
fn orthogonalise(basis: &[Vec<f64>], w: &mut [f64]) -> Vec<f64> {
    let mut coeffs = vec![0.0; basis.len()];
    for _ in 0..2 {
        let c: Vec<f64> = basis.iter().map(|v| dot(v, w)).collect();
        for (v, ci) in basis.iter().zip(&c) {
            axpy(-ci, v, w);
        }
        coeffs.iter_mut().zip(&c).for_each(|(a, b)| *a += b);
    }
    coeffs
}

fn fresh_direction(basis: &[Vec<f64>], rng: &mut rand_chacha::ChaCha8Rng) -> Vec<f64> {
    let n = basis[0].len();
    loop {
        let mut w = random_unit_vector(n, rng);
        orthogonalise(basis, &mut w);
        let nw = norm(&w);
        if nw > 1e-3 {
            w.iter_mut().for_each(|x| *x /= nw);
            return w;
        }
    }
}

/// The `m` eigenpairs of `A` just above the factorised shift; all lie below `upper`.
fn krylov_schur(
    a: &SymmetricMatrix,
    factor: &BandLdl,
    m: usize,
    upper: f64,
    opts: EigenOptions,
    seed: u64,
) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let n = a.n();
    let sigma = factor.shift();
    let ncv = (2 * m + 20).max(m + 40).min(n - 1);
    let keep = (m + (ncv - m) / 2).min(ncv - 1);
    let mut rng = seeded_rng(seed);
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(ncv + 1);
    basis.push(random_unit_vector(n, &mut rng));
    let mut h = DMatrix::<f64>::zeros(ncv, ncv);
    let mut k = 0;
    let mut best_converged = 0;
    let mut stalled = 0;
    let mut ax = vec![0.0; n];
    for restart in 0..opts.max_restarts {
        for j in k..ncv {
            let mut w = basis[j].clone();
            factor.solve_in_place(&mut w);
            let coeffs = orthogonalise(&basis[..=j], &mut w);
            for (i, &c) in coeffs.iter().enumerate() {
                h[(i, j)] = c;
                h[(j, i)] = c;
            }
            let beta = norm(&w);
            if beta <= 1e-12 * norm(&coeffs).max(f64::MIN_POSITIVE) {
                // invariant subspace: continue with any orthogonal direction
                w = fresh_direction(&basis, &mut rng);
            } else {
                w.iter_mut().for_each(|x| *x /= beta);
            }
            basis.push(w);
        }
        let eig = SymmetricEigen::new(h.clone());
        let mut order: Vec<usize> = (0..ncv).collect();
        order.sort_by(|&p, &q| eig.eigenvalues[q].total_cmp(&eig.eigenvalues[p]));
        let theta: Vec<f64> = order.iter().map(|&p| eig.eigenvalues[p]).collect();
        let ritz: Vec<Vec<f64>> = order[..keep]
            .iter()
            .map(|&p| {
                let mut x = vec![0.0; n];
                for (j, v) in basis[..ncv].iter().enumerate() {
                    axpy(eig.eigenvectors[(j, p)], v, &mut x);
                }
                x
            })
            .collect();
        let mut converged = 0;
        let mut lambdas = Vec::with_capacity(m);
        for i in 0..m {
            if theta[i] <= 0.0 {
                break;
            }
            let lambda = sigma + 1.0 / theta[i];
            if lambda >= upper + opts.tol {
                break;
            }
            a.mul_vec(&ritz[i], &mut ax);
            let nx = norm(&ritz[i]);
            let r = ax
                .iter()
                .zip(&ritz[i])
                .map(|(p, q)| (p - lambda * q).powi(2))
                .sum::<f64>()
                .sqrt()
                / nx;
            if r <= 0.5 * opts.tol {
                converged += 1;
            }
            lambdas.push(lambda);
        }
        log::trace!("restart {restart}: {converged}/{m} converged");
        if converged == m {
            return Ok((lambdas, ritz.into_iter().take(m).collect()));
        }
        if converged > best_converged {
            best_converged = converged;
            stalled = 0;
        } else {
            stalled += 1;
        }
        let residual = basis.pop().unwrap();
        basis = ritz;
        h.fill(0.0);
        for (i, &t) in theta[..keep].iter().enumerate() {
            h[(i, i)] = t;
        }
        if stalled >= STALL_LIMIT {
            // a missing copy of a repeated eigenvalue is invisible to the Krylov space
            stalled = 0;
            basis.push(fresh_direction(&basis, &mut rng));
        } else {
            basis.push(residual);
        }
        k = keep;
    }
    Err(Error::NotConverged(format!(
        "Lanczos reached {} restarts with {best_converged}/{m} pairs converged",
        opts.max_restarts
    )))
}

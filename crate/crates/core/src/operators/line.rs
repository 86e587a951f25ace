//! One-dimensional model operators: the half-line Airy operator
//! `−d²/dt² + t + V(t)` and the harmonic oscillator `−d²/ds² + (κ₀/2)s²`.

use super::{BoundaryCondition, Chart, DiscreteOperator, EdgeCondition};
use crate::error::{Error, Result};
use crate::sparse::SymmetricBuilder;

/// Truncation length for half-line solves whose spectral window ends at `window_top`.
pub fn half_line_truncation(window_top: f64) -> f64 {
    40f64.max(2.0 * window_top)
}

/// Three-point scheme for `−d²/dx² + q(x)` on `(a, a + n·dx)`; Dirichlet at the left end,
/// `left`/`right` select the closure at each end.
fn assemble_line(
    a: f64,
    length: f64,
    n: usize,
    left: EdgeCondition,
    right: EdgeCondition,
    q: impl Fn(f64) -> f64,
) -> (SymmetricBuilder, Vec<f64>, Vec<f64>) {
    let dx = length / n as f64;
    let first = if left == EdgeCondition::Dirichlet {
        1
    } else {
        0
    };
    let last = if right == EdgeCondition::Dirichlet {
        n - 1
    } else {
        n
    };
    let nodes: Vec<usize> = (first..=last).collect();
    let coords: Vec<f64> = nodes.iter().map(|&i| a + i as f64 * dx).collect();
    let weights: Vec<f64> = nodes
        .iter()
        .map(|&i| if i == 0 || i == n { 0.5 * dx } else { dx })
        .collect();
    let m = nodes.len();
    let mut k = SymmetricBuilder::new(m);
    let stiff = 1.0 / dx;
    // interval (i, i+1) contributes (u_{i+1} − u_i)²/dx; Dirichlet neighbours are zero
    for interval in 0..n {
        let lhs = interval.checked_sub(first).filter(|&p| p < m);
        let rhs = (interval + 1).checked_sub(first).filter(|&p| p < m);
        match (lhs, rhs) {
            (Some(p), Some(r)) => {
                let sp = 1.0 / weights[p].sqrt();
                let sr = 1.0 / weights[r].sqrt();
                k.add_diag(p, stiff * sp * sp);
                k.add_diag(r, stiff * sr * sr);
                k.add_sym(p, r, -stiff * (sp * sr));
            }
            (Some(p), None) => k.add_diag(p, stiff / weights[p]),
            (None, Some(r)) => k.add_diag(r, stiff / weights[r]),
            (None, None) => {}
        }
    }
    for (p, &x) in coords.iter().enumerate() {
        k.add_diag(p, q(x));
    }
    (k, coords, weights)
}

/// `−d²/dt² + t + v(t)` on `(0, T)` with `n` intervals, Dirichlet at `t = 0`.
pub fn assemble_model_1d(
    t_max: f64,
    n: usize,
    bc_right: EdgeCondition,
    v_slice: impl Fn(f64) -> f64,
) -> Result<DiscreteOperator> {
    if !(t_max > 0.0 && t_max.is_finite()) {
        return Err(Error::param(format!(
            "truncation length must be positive, got {t_max}"
        )));
    }
    if n < 16 {
        return Err(Error::param(format!("need at least 16 intervals, got {n}")));
    }
    let (k, coords, weights) =
        assemble_line(0.0, t_max, n, EdgeCondition::Dirichlet, bc_right, |t| {
            t + v_slice(t)
        });
    let bc = BoundaryCondition {
        t_far: bc_right,
        ..BoundaryCondition::dirichlet()
    };
    DiscreteOperator::new(
        k.build(),
        weights,
        Chart::Line { coords },
        bc,
        None,
        format!("half-line Airy model on (0, {t_max}), {n} intervals, {bc_right:?} at far end"),
    )
}

/// `−d²/ds² + (κ₀/2)s²` on `(−S, S)` with `n` intervals; `window_top` is the largest
/// eigenvalue the caller intends to use and must lie below the potential at `±S`.
pub fn assemble_oscillator_1d(
    kappa0: f64,
    s_half: f64,
    n: usize,
    bc: BoundaryCondition,
    window_top: f64,
) -> Result<DiscreteOperator> {
    if !(kappa0 > 0.0) || !(s_half > 0.0) {
        return Err(Error::param("κ₀ and S must be positive"));
    }
    if n < 16 {
        return Err(Error::param(format!("need at least 16 intervals, got {n}")));
    }
    let edge = 0.5 * kappa0 * s_half * s_half;
    if edge <= window_top {
        return Err(Error::param(format!(
            "window too small: (κ₀/2)S² = {edge} does not exceed the spectral window {window_top}"
        )));
    }
    let (k, coords, weights) =
        assemble_line(-s_half, 2.0 * s_half, n, bc.s_minus, bc.s_plus, |s| {
            0.5 * kappa0 * s * s
        });
    DiscreteOperator::new(
        k.build(),
        weights,
        Chart::Line { coords },
        bc,
        None,
        format!("harmonic oscillator κ₀ = {kappa0} on (−{s_half}, {s_half}), {n} intervals"),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parameter_errors() {
        assert!(assemble_model_1d(-1.0, 100, EdgeCondition::Dirichlet, |_| 0.0).is_err());
        assert!(assemble_model_1d(10.0, 8, EdgeCondition::Dirichlet, |_| 0.0).is_err());
        assert!(
            assemble_oscillator_1d(1.0, 2.0, 100, BoundaryCondition::dirichlet(), 5.0).is_err()
        );
    }

    #[test]
    fn dirichlet_interior_stencil() {
        let op = assemble_model_1d(1.6, 16, EdgeCondition::Dirichlet, |_| 0.0).unwrap();
        assert_eq!(op.dim(), 15);
        let a = op.matrix();
        let dt: f64 = 0.1;
        assert!((a.get(3, 3) - (2.0 / (dt * dt) + 0.4)).abs() < 1e-10);
        assert!((a.get(3, 4) + 1.0 / (dt * dt)).abs() < 1e-10);
        assert!(a.is_symmetric());
    }

    #[test]
    fn neumann_end_has_half_weight() {
        let op = assemble_model_1d(1.6, 16, EdgeCondition::Neumann, |_| 0.0).unwrap();
        assert_eq!(op.dim(), 16);
        assert!((op.weights()[15] - 0.05).abs() < 1e-15);
        let sum: f64 = op.weights().iter().sum();
        assert!((sum - 1.55).abs() < 1e-12);
    }
}

//! `−h²Δ + x₁` on the whole domain with Dirichlet conditions, on a Cartesian
//! grid with cut-cell boundary closure, truncated at `x₁ = x_cut`.
//!
//! Boundary arms use linear ghost extrapolation through the boundary point at
//! fraction `θ` of the grid spacing: the arm contributes `c/θ` to the diagonal
//! and nothing off the diagonal, so the matrix stays symmetric.

use super::{BoundaryCondition, Chart, DiscreteOperator};
use crate::error::{Error, Result};
use crate::geometry::{BoundaryCurve, DomainSpec};
use crate::sparse::SymmetricBuilder;

/// Smallest boundary fraction kept in the stencil.
const THETA_FLOOR: f64 = 1e-6;

/// Cartesian mesh of the truncated domain `Ω ∩ {x₁ < x_cut}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FullMesh {
    pub dx: f64,
    pub dy: f64,
    pub x_cut: f64,
    pub max_unknowns: usize,
}

impl FullMesh {
    /// Spacing `h^{2/3}/20` in `x₁` and a twentieth of the tangential oscillator
    /// length in `x₂`, truncated nine Airy units above `spectral_top` (units of `h^{2/3}` above `x₀`).
    pub fn resolved(curve: &BoundaryCurve, h: f64, spectral_top: f64) -> Self {
        let ht = h.powf(2.0 / 3.0);
        let ell = (h * h / (0.5 * curve.kappa0())).powf(0.25);
        FullMesh {
            dx: ht / 20.0,
            dy: ell / 20.0,
            x_cut: curve.x0() + ht * (spectral_top + 9.0),
            max_unknowns: 400_000,
        }
    }

    pub fn refined(self, factor: f64) -> Self {
        FullMesh {
            dx: self.dx / factor,
            dy: self.dy / factor,
            ..self
        }
    }
}

/// Dirichlet Stark operator on the Cartesian mesh.
pub fn assemble_full_2d(spec: &DomainSpec, h: f64, mesh: FullMesh) -> Result<DiscreteOperator> {
    spec.validate()?;
    if !(h > 0.0 && mesh.dx > 0.0 && mesh.dy > 0.0) {
        return Err(Error::param("h and mesh spacings must be positive"));
    }
    let ht = h.powf(2.0 / 3.0);
    if mesh.dx > 0.2 * ht {
        log::warn!(
            "full-domain mesh dx = {} does not resolve the boundary layer h^(2/3) = {ht}",
            mesh.dx
        );
    }
    let (lo, hi) = spec.bounding_box();
    let x_hi = hi[0].min(mesh.x_cut);
    let level = |p: [f64; 2]| spec.level(p).max(p[0] - mesh.x_cut);
    let x_start = lo[0] - 0.5 * mesh.dx;
    let nx = ((x_hi - x_start) / mesh.dx).ceil() as usize + 2;
    let y_mid = 0.5 * (lo[1] + hi[1]);
    let half_ny = ((0.5 * (hi[1] - lo[1])) / mesh.dy).ceil() as usize + 1;
    let ny = 2 * half_ny + 1;
    let xs: Vec<f64> = (0..nx)
        .map(|i| x_start + (i as f64 + 0.5) * mesh.dx)
        .collect();
    let ys: Vec<f64> = (0..ny)
        .map(|j| y_mid + (j as f64 - half_ny as f64) * mesh.dy)
        .collect();
    let inside: Vec<bool> = (0..nx * ny)
        .map(|k| level([xs[k % nx], ys[k / nx]]) < 0.0)
        .collect();
    let count = inside.iter().filter(|&&b| b).count();
    if count > mesh.max_unknowns {
        return Err(Error::Capacity {
            what: "full-domain unknowns",
            requested: count,
            capacity: mesh.max_unknowns,
        });
    }
    if count == 0 {
        return Err(Error::param("mesh has no interior nodes"));
    }
    // order the shorter extent fastest to keep the bandwidth small
    let x_span = inside
        .chunks(nx)
        .map(|row| row.iter().filter(|&&b| b).count())
        .max()
        .unwrap_or(0);
    let y_span = (0..nx)
        .map(|i| (0..ny).filter(|&j| inside[j * nx + i]).count())
        .max()
        .unwrap_or(0);
    let mut index = vec![usize::MAX; nx * ny];
    let mut coords = Vec::with_capacity(count);
    if x_span <= y_span {
        for j in 0..ny {
            for i in 0..nx {
                if inside[j * nx + i] {
                    index[j * nx + i] = coords.len();
                    coords.push([xs[i], ys[j]]);
                }
            }
        }
    } else {
        for i in 0..nx {
            for j in 0..ny {
                if inside[j * nx + i] {
                    index[j * nx + i] = coords.len();
                    coords.push([xs[i], ys[j]]);
                }
            }
        }
    }
    let fraction = |p: [f64; 2], q: [f64; 2]| {
        let (mut a, mut b) = (0.0, 1.0);
        for _ in 0..60 {
            let m = 0.5 * (a + b);
            if level([p[0] + m * (q[0] - p[0]), p[1] + m * (q[1] - p[1])]) < 0.0 {
                a = m;
            } else {
                b = m;
            }
        }
        (0.5 * (a + b)).max(THETA_FLOOR)
    };
    let cx = h * h / (mesh.dx * mesh.dx);
    let cy = h * h / (mesh.dy * mesh.dy);
    let mut b = SymmetricBuilder::new(count);
    for j in 0..ny {
        for i in 0..nx {
            let k = index[j * nx + i];
            if k == usize::MAX {
                continue;
            }
            let p = [xs[i], ys[j]];
            b.add_diag(k, p[0]);
            let arms = [
                (
                    i.checked_sub(1).map(|ii| (ii, j)),
                    cx,
                    [xs[i] - mesh.dx, ys[j]],
                ),
                (
                    (i + 1 < nx).then_some((i + 1, j)),
                    cx,
                    [xs[i] + mesh.dx, ys[j]],
                ),
                (
                    j.checked_sub(1).map(|jj| (i, jj)),
                    cy,
                    [xs[i], ys[j] - mesh.dy],
                ),
                (
                    (j + 1 < ny).then_some((i, j + 1)),
                    cy,
                    [xs[i], ys[j] + mesh.dy],
                ),
            ];
            for (nb, c, q) in arms {
                match nb.map(|(a, bb)| index[bb * nx + a]) {
                    Some(m) if m != usize::MAX => {
                        b.add_diag(k, c);
                        if m > k {
                            b.add_sym(k, m, -c);
                        }
                    }
                    _ => b.add_diag(k, c / fraction(p, q)),
                }
            }
        }
    }
    let weights = vec![mesh.dx * mesh.dy; count];
    DiscreteOperator::new(
        b.build(),
        weights,
        Chart::Cartesian {
            coords,
            dx: mesh.dx,
            dy: mesh.dy,
        },
        BoundaryCondition::dirichlet(),
        Some(h),
        format!(
            "full-domain operator h = {h}, dx = {:.3e}, dy = {:.3e}, x_cut = {:.6}, {count} nodes",
            mesh.dx, mesh.dy, mesh.x_cut
        ),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::build_domain;

    #[test]
    fn symmetric_with_capacity_guard() {
        let spec = DomainSpec::unit_disk();
        let curve = build_domain(&spec).unwrap();
        let mesh = FullMesh::resolved(&curve, 0.1, 4.0);
        let op = assemble_full_2d(&spec, 0.1, mesh).unwrap();
        assert!(op.matrix().is_symmetric());
        let tiny = FullMesh {
            max_unknowns: 10,
            ..mesh
        };
        assert!(matches!(
            assemble_full_2d(&spec, 0.1, tiny),
            Err(Error::Capacity { .. })
        ));
    }
}

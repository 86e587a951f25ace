//! The boundary-window operator: the form
//! `∬ h²(m⁻²|∂_sψ|² + |∂_tψ|²) + τ₁|ψ|²  m ds dt` on `(−S, S) × (0, T)`
//! in tubular coordinates, discretised on a tensor grid.

use super::{BoundaryCondition, Chart, DiscreteOperator, EdgeCondition, Regime, RescaledPotential};
use crate::error::{Error, Result};
use crate::geometry::TubularMap;
use crate::sparse::SymmetricBuilder;

/// Grid density relative to the natural length scales of the boundary layer.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WindowResolution {
    /// Nodes per unit of the normal scale `h^{2/3}`.
    pub per_airy_unit: f64,
    /// Nodes per tangential oscillator length `h^{1/3}·(h^{1/3}/√(κ₀/2))^{1/2}`.
    pub per_oscillator_length: f64,
}

impl Default for WindowResolution {
    fn default() -> Self {
        WindowResolution {
            per_airy_unit: 20.0,
            per_oscillator_length: 20.0,
        }
    }
}

impl WindowResolution {
    pub fn scaled(self, factor: f64) -> Self {
        WindowResolution {
            per_airy_unit: self.per_airy_unit * factor,
            per_oscillator_length: self.per_oscillator_length * factor,
        }
    }
}

/// Physical half-width `S` (tangential) and depth `T` (normal) of a window.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WindowExtents {
    pub s_half: f64,
    pub t_len: f64,
}

/// Inputs of [`assemble_window_2d`].
#[derive(Clone, Debug)]
pub struct WindowParams {
    pub h: f64,
    pub eta: f64,
    pub bc: BoundaryCondition,
    /// Use the exact `τ₁`; otherwise the model `x₀ + t + (κ₀/2)s²`.
    pub exact_tau1: bool,
    pub potential: Option<RescaledPotential>,
    /// Threshold regime, used for the admissible range of `η`.
    pub regime: Regime,
    /// Largest energy of interest in units of `h^{2/3}` above `x₀`.
    pub spectral_top: f64,
    /// Explicit extents; derived from `spectral_top` when absent.
    pub extents: Option<WindowExtents>,
    pub resolution: WindowResolution,
}

impl WindowParams {
    pub fn new(h: f64) -> Self {
        WindowParams {
            h,
            eta: 1.0 / 30.0,
            bc: BoundaryCondition::dirichlet(),
            exact_tau1: true,
            potential: None,
            regime: Regime::First,
            spectral_top: 5.0,
            extents: None,
            resolution: WindowResolution::default(),
        }
    }

    fn check_eta(&self) -> Result<()> {
        let upper = match self.regime {
            Regime::First => 1.0 / 15.0,
            Regime::Second { alpha } => ((1.0 - alpha) / 5.0).min(1.0 / 15.0),
        };
        if !(self.eta > 0.0 && self.eta < upper) {
            return Err(Error::param(format!(
                "η = {} outside (0, {upper}) for this regime",
                self.eta
            )));
        }
        Ok(())
    }
}

/// Tangential length scale `(h^{1/3}/√(κ₀/2))^{1/2}` of the low-lying states, rescaled by `h^{1/3}`.
fn oscillator_length(h: f64, kappa0: f64) -> f64 {
    if kappa0 > 0.0 {
        (h.powf(1.0 / 3.0) / (0.5 * kappa0).sqrt()).sqrt()
    } else {
        1.0
    }
}

/// Extents used when none are given: the larger of the window `h^{−η}` (rescaled)
/// and a resolution rule covering the classically allowed region plus decay
/// margins for every state up to `spectral_top`; clipped to the tubular strip.
pub fn window_extents(map: &TubularMap, p: &WindowParams) -> Result<WindowExtents> {
    p.check_eta()?;
    let h = p.h;
    if let Some(e) = p.extents {
        if !(e.s_half > 0.0 && e.t_len > 0.0) {
            return Err(Error::param("window extents must be positive"));
        }
        if e.s_half > map.s_half() || e.t_len > map.t_max() {
            return Err(Error::param(format!(
                "window ({}, {}) exceeds the tubular strip ({}, {})",
                e.s_half,
                e.t_len,
                map.s_half(),
                map.t_max()
            )));
        }
        return Ok(e);
    }
    let kappa0 = map.kappa0();
    if !(kappa0 > 0.0) {
        return Err(Error::param("flat charts need explicit window extents"));
    }
    let hs = h.powf(1.0 / 3.0);
    let ht = h.powf(2.0 / 3.0);
    let paper = h.powf(-p.eta);
    if paper * hs >= map.s_half() || paper * ht >= map.t_max() {
        return Err(Error::param(format!(
            "h = {h} too large: the window h^(1/3−η) × h^(2/3−η) does not fit the strip"
        )));
    }
    let z1 = crate::specfun::airy_zero(1)?;
    let excess = (p.spectral_top - z1).max(0.0);
    let s_turn_sq = 2.0 * excess / kappa0;
    let s_resc = paper.max((s_turn_sq + 36.0 * hs / (0.5 * kappa0).sqrt()).sqrt());
    let t_resc = paper.max(p.spectral_top + 9.0);
    let margin = 1.0 - 1e-9;
    Ok(WindowExtents {
        s_half: (s_resc * hs).min(map.s_half() * margin),
        t_len: (t_resc * ht).min(map.t_max() * margin),
    })
}

/// Symmetric discretisation of the window form; see the module docs.
pub fn assemble_window_2d(map: &TubularMap, p: &WindowParams) -> Result<DiscreteOperator> {
    if !(p.h > 0.0) {
        return Err(Error::param(format!("h must be positive, got {}", p.h)));
    }
    let ext = window_extents(map, p)?;
    let h = p.h;
    let hs = h.powf(1.0 / 3.0);
    let ht = h.powf(2.0 / 3.0);
    let ds_target = oscillator_length(h, map.kappa0()) * hs / p.resolution.per_oscillator_length;
    let dt_target = ht / p.resolution.per_airy_unit;
    let ns_int = 2 * ((ext.s_half / ds_target).ceil() as usize).max(4);
    let nt_int = ((ext.t_len / dt_target).ceil() as usize).max(8);
    let ds = 2.0 * ext.s_half / ns_int as f64;
    let dt = ext.t_len / nt_int as f64;

    let s_nodes: Vec<usize> = (0..=ns_int)
        .filter(|&i| {
            !(i == 0 && p.bc.s_minus == EdgeCondition::Dirichlet
                || i == ns_int && p.bc.s_plus == EdgeCondition::Dirichlet)
        })
        .collect();
    let t_nodes: Vec<usize> = (0..=nt_int)
        .filter(|&j| {
            !(j == 0 && p.bc.t_zero == EdgeCondition::Dirichlet
                || j == nt_int && p.bc.t_far == EdgeCondition::Dirichlet)
        })
        .collect();
    let (ns, nt) = (s_nodes.len(), t_nodes.len());
    let n = ns * nt;
    let s_fastest = ns <= nt;
    let mut s_pos = vec![usize::MAX; ns_int + 1];
    for (k, &i) in s_nodes.iter().enumerate() {
        s_pos[i] = k;
    }
    let mut t_pos = vec![usize::MAX; nt_int + 1];
    for (k, &j) in t_nodes.iter().enumerate() {
        t_pos[j] = k;
    }
    let index = |i: usize, j: usize| -> Option<usize> {
        let (a, b) = (s_pos[i], t_pos[j]);
        if a == usize::MAX || b == usize::MAX {
            None
        } else if s_fastest {
            Some(b * ns + a)
        } else {
            Some(a * nt + b)
        }
    };

    // boundary data at nodes and mid-points in s
    let s_at = |i2: usize| -ext.s_half + 0.5 * ds * i2 as f64;
    let geo: Vec<(f64, [f64; 2], [f64; 2])> = (0..=2 * ns_int)
        .map(|i2| {
            let s = s_at(i2);
            match map.curve() {
                Some(c) => {
                    let cp = c.at(s);
                    (cp.kappa, cp.point, cp.normal)
                }
                None => (0.0, [0.0, s], [-1.0, 0.0]),
            }
        })
        .collect();
    let x0 = map.x0();
    let kappa0 = map.kappa0();
    let jac = |i2: usize, t: f64| 1.0 - geo[i2].0 * t;
    let tau1 = |i2: usize, t: f64| {
        if p.exact_tau1 {
            geo[i2].1[0] - t * geo[i2].2[0]
        } else {
            let s = s_at(i2);
            x0 + t + 0.5 * kappa0 * s * s
        }
    };
    let ds_eff = |i: usize| if i == 0 || i == ns_int { 0.5 * ds } else { ds };
    let dt_eff = |j: usize| if j == 0 || j == nt_int { 0.5 * dt } else { dt };

    let mut weights = vec![0.0; n];
    let mut coords = vec![[0.0; 2]; n];
    for &i in &s_nodes {
        for &j in &t_nodes {
            let k = index(i, j).unwrap();
            let t = j as f64 * dt;
            weights[k] = jac(2 * i, t) * ds_eff(i) * dt_eff(j);
            coords[k] = [s_at(2 * i), t];
        }
    }
    let inv_sqrt: Vec<f64> = weights.iter().map(|w| 1.0 / w.sqrt()).collect();
    let mut b = SymmetricBuilder::new(n);
    let h2 = h * h;
    let add_edge =
        |b: &mut SymmetricBuilder, u: Option<usize>, v: Option<usize>, c: f64| match (u, v) {
            (Some(u), Some(v)) => {
                b.add_diag(u, c * inv_sqrt[u] * inv_sqrt[u]);
                b.add_diag(v, c * inv_sqrt[v] * inv_sqrt[v]);
                b.add_sym(u, v, -c * (inv_sqrt[u] * inv_sqrt[v]));
            }
            (Some(u), None) | (None, Some(u)) => b.add_diag(u, c * inv_sqrt[u] * inv_sqrt[u]),
            (None, None) => {}
        };
    // tangential fluxes h² m⁻¹ ∂_s between (i, j) and (i+1, j)
    for j in 0..=nt_int {
        let t = j as f64 * dt;
        for i in 0..ns_int {
            let c = h2 * dt_eff(j) / (ds * jac(2 * i + 1, t));
            add_edge(&mut b, index(i, j), index(i + 1, j), c);
        }
    }
    // normal fluxes h² m ∂_t between (i, j) and (i, j+1)
    for i in 0..=ns_int {
        for j in 0..nt_int {
            let t_mid = (j as f64 + 0.5) * dt;
            let c = h2 * ds_eff(i) * jac(2 * i, t_mid) / dt;
            add_edge(&mut b, index(i, j), index(i, j + 1), c);
        }
    }
    let coef = p.potential.as_ref().map_or(0.0, |v| v.energy_coefficient());
    for &i in &s_nodes {
        for &j in &t_nodes {
            let k = index(i, j).unwrap();
            let t = j as f64 * dt;
            let mut q = tau1(2 * i, t);
            if let Some(v) = &p.potential {
                q += coef * v.eval(s_at(2 * i), t);
            }
            b.add_diag(k, q);
        }
    }
    let description = format!(
        "window operator h = {h}, S = {:.6}, T = {:.6}, {} × {} nodes, bc {}, {} τ₁{}",
        ext.s_half,
        ext.t_len,
        ns,
        nt,
        p.bc.label(),
        if p.exact_tau1 { "exact" } else { "model" },
        if p.potential.is_some() {
            ", perturbed"
        } else {
            ""
        }
    );
    DiscreteOperator::new(
        b.build(),
        weights,
        Chart::Window { coords, ns, nt },
        p.bc,
        Some(h),
        description,
    )
}

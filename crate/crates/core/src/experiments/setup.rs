//! Solver settings and operator construction shared by the studies.

use serde::{Deserialize, Serialize};

use super::{OperatorMode, StudyConfig};
use crate::eigensolve::EigenOptions;
use crate::error::{Error, Result};
use crate::geometry::{build_domain, BoundaryCurve, TubularMap};
use crate::operators::{
    assemble_full_2d, assemble_window_2d, window_extents, BoundaryCondition, DiscreteOperator,
    FullMesh, RescaledPotential, WindowExtents, WindowParams, WindowResolution,
};

/// Numerical controls of a study.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSettings {
    /// Residual tolerance of computed eigenpairs (physical energy units).
    pub tol: f64,
    /// Half-width of the count ambiguity bracket (physical energy units).
    pub bracket_tol: f64,
    /// Multiplier on the default grid densities.
    pub resolution: f64,
    /// Window exponent `η`.
    pub eta: f64,
    pub max_unknowns: usize,
    pub max_states: usize,
    pub seed: u64,
}

impl Default for SolverSettings {
    fn default() -> Self {
        SolverSettings {
            tol: 1e-9,
            bracket_tol: 1e-9,
            resolution: 1.0,
            eta: 1.0 / 30.0,
            max_unknowns: 400_000,
            max_states: 2000,
            seed: EigenOptions::default().seed,
        }
    }
}

impl SolverSettings {
    pub(crate) fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if !(self.tol > 0.0) {
            out.push("solver.tol must be positive".to_string());
        }
        if !(self.bracket_tol >= 0.0) {
            out.push("solver.bracket_tol must be non-negative".to_string());
        }
        // spacing must stay below h^{2/3}/5 in the normal direction
        if !(self.resolution >= 0.25) {
            out.push(
                "solver.resolution below 0.25 under-resolves the h^(2/3) boundary layer"
                    .to_string(),
            );
        }
        if !(self.eta > 0.0 && self.eta < 1.0 / 15.0) {
            out.push("solver.eta must lie in (0, 1/15)".to_string());
        }
        if self.max_unknowns == 0 || self.max_states == 0 {
            out.push("solver capacities must be positive".to_string());
        }
        out
    }

    pub fn eigen_options(&self, want_vectors: bool) -> EigenOptions {
        EigenOptions {
            tol: self.tol,
            want_vectors,
            max_states: self.max_states,
            seed: self.seed,
            ..EigenOptions::default()
        }
    }
}

/// Domain data reused across every `h` of a study.
pub(crate) struct Setup<'a> {
    pub cfg: &'a StudyConfig,
    pub curve: BoundaryCurve,
    pub map: TubularMap,
}

/// Extra window coverage: support box `([s0, s1], [t0, t1])` in physical units.
pub(crate) type Cover = ([f64; 2], [f64; 2]);

impl<'a> Setup<'a> {
    pub fn new(cfg: &'a StudyConfig) -> Result<Self> {
        cfg.validate()?;
        let curve = build_domain(&cfg.domain)?;
        let kappa_geom = curve.kappa0();
        if ((kappa_geom - cfg.params.kappa0) / kappa_geom).abs() > 1e-6 {
            log::warn!(
                "configured κ₀ = {} differs from the domain's κ₀ = {kappa_geom}",
                cfg.params.kappa0
            );
        }
        if (curve.x0() - cfg.params.x0).abs() > 1e-9 {
            log::warn!(
                "configured x₀ = {} differs from the domain's x₀ = {}",
                cfg.params.x0,
                curve.x0()
            );
        }
        let map = TubularMap::new(curve.clone())?;
        Ok(Setup { cfg, curve, map })
    }

    /// Operator at `h` resolving energies up to `top` (units of `h^{2/3}` above `x₀`).
    pub fn operator(
        &self,
        h: f64,
        top: f64,
        bc: BoundaryCondition,
        potential: Option<RescaledPotential>,
        cover: Option<Cover>,
    ) -> Result<DiscreteOperator> {
        match self.cfg.mode {
            OperatorMode::Window => self.window(h, top, bc, potential, cover),
            OperatorMode::Full => {
                if potential.is_some() {
                    return Err(Error::param(
                        "the full-domain operator carries no potential",
                    ));
                }
                if bc != BoundaryCondition::dirichlet() {
                    return Err(Error::param("the full-domain operator is Dirichlet only"));
                }
                self.full(h, top)
            }
        }
    }

    pub fn full(&self, h: f64, top: f64) -> Result<DiscreteOperator> {
        let mesh = FullMesh {
            max_unknowns: self.cfg.solver.max_unknowns,
            ..FullMesh::resolved(&self.curve, h, top).refined(self.cfg.solver.resolution)
        };
        assemble_full_2d(&self.cfg.domain, h, mesh)
    }

    pub fn window(
        &self,
        h: f64,
        top: f64,
        bc: BoundaryCondition,
        potential: Option<RescaledPotential>,
        cover: Option<Cover>,
    ) -> Result<DiscreteOperator> {
        let mut p = WindowParams::new(h);
        p.eta = self.cfg.solver.eta;
        p.bc = bc;
        p.regime = self.cfg.regime();
        p.spectral_top = top;
        p.resolution = WindowResolution::default().scaled(self.cfg.solver.resolution);
        p.potential = potential;
        let base = window_extents(&self.map, &p)?;
        let hs = h.powf(1.0 / 3.0);
        let ht = h.powf(2.0 / 3.0);
        if let Some((s, t)) = cover {
            let s_half = base.s_half.max(s[0].abs().max(s[1].abs()) + hs);
            let t_len = base.t_len.max(t[1] + 2.0 * ht);
            if s_half >= self.map.s_half() || t_len >= self.map.t_max() {
                return Err(Error::Coverage(format!(
                    "potential support needs a window ({s_half:.4e}, {t_len:.4e}) beyond the tubular strip ({:.4e}, {:.4e})",
                    self.map.s_half(),
                    self.map.t_max()
                )));
            }
            p.extents = Some(WindowExtents { s_half, t_len });
        }
        let ext = p.extents.unwrap_or(base);
        let k2 = 0.5 * self.map.kappa0();
        let ds = (hs / k2.sqrt()).sqrt() * hs / p.resolution.per_oscillator_length;
        let dt = ht / p.resolution.per_airy_unit;
        let estimate = ((2.0 * ext.s_half / ds).ceil() * (ext.t_len / dt).ceil()) as usize;
        if estimate > self.cfg.solver.max_unknowns {
            return Err(Error::Capacity {
                what: "window unknowns",
                requested: estimate,
                capacity: self.cfg.solver.max_unknowns,
            });
        }
        assemble_window_2d(&self.map, &p)
    }
}

/// Runs `job` for every `h` on a pool of `workers` threads, keeping input order.
pub(crate) fn per_h<T: Send>(
    hs: &[f64],
    workers: usize,
    job: impl Fn(f64) -> Result<T> + Sync,
) -> Result<Vec<T>> {
    use rayon::prelude::*;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    pool.install(|| {
        hs.par_iter()
            .map(|&h| job(h).map_err(|e| e.at_h(h)))
            .collect::<Vec<_>>()
    })
    .into_iter()
    .collect()
}

/// The operator a study uses at `h`, together with its threshold `Λ`.
/// Perturbed studies include the rescaled potential; other kinds solve the bare operator.
pub fn study_operator(cfg: &StudyConfig, h: f64) -> Result<(DiscreteOperator, f64)> {
    let setup = Setup::new(cfg)?;
    let regime = cfg.regime();
    let lambda = cfg.params.threshold(regime, h)?;
    let top = (lambda - cfg.params.x0) / h.powf(2.0 / 3.0) + 0.5;
    let op = match (&cfg.potential, cfg.kind) {
        (Some(v), super::StudyKind::Perturbed) => {
            let rv = crate::operators::rescale_potential(v, h, regime)?;
            let cover = (!v.is_zero()).then(|| rv.support());
            setup.window(h, top, BoundaryCondition::dirichlet(), Some(rv), cover)?
        }
        _ => setup.operator(h, top, BoundaryCondition::dirichlet(), None, None)?,
    };
    Ok((op, lambda))
}

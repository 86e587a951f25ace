//! Closed-form semiclassical limits and constants used as comparison targets.
//!
//! All thresholds are offsets above `x₀`: `Λ = x₀ + μh^{2/3}` in the first
//! regime and `Λ = x₀ + z₁h^{2/3} + μh^α` in the second.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma as gamma_fn;

use crate::eigensolve::tridiag::Tridiagonal;
use crate::error::{Error, Result};
use crate::operators::{half_line_truncation, Regime, TestPotential};
use crate::quadrature::integrate;
use crate::specfun::{airy_zero, AiryZeroTable, NormalizedAiryState};

/// Absolute tolerance of the adaptive quadratures in this module.
const QUAD_TOL: f64 = 1e-10;
/// Airy states are negligible beyond `z_k + AIRY_TAIL`.
const AIRY_TAIL: f64 = 14.0;
/// Grid intervals per unit length in the 1D slice solves.
const SLICE_DENSITY: f64 = 100.0;

/// Parameters of the limit formulas.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LimitParams {
    /// Riesz order `γ ≥ 0`.
    pub gamma: f64,
    /// Threshold offset `μ ≥ 0`.
    pub mu: f64,
    /// Second-regime exponent in `(2/3, 1)`; ignored in the first regime.
    pub alpha: f64,
    pub kappa0: f64,
    pub x0: f64,
}

impl Default for LimitParams {
    fn default() -> Self {
        LimitParams {
            gamma: 0.0,
            mu: 4.0,
            alpha: 0.8,
            kappa0: 1.0,
            x0: 0.0,
        }
    }
}

impl LimitParams {
    pub fn new(gamma: f64, mu: f64, kappa0: f64) -> Self {
        LimitParams {
            gamma,
            mu,
            kappa0,
            ..Self::default()
        }
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = alpha;
        self
    }

    pub fn with_x0(mut self, x0: f64) -> Self {
        self.x0 = x0;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma >= 0.0 && self.gamma.is_finite()) {
            return Err(Error::param(format!(
                "γ must be a finite value ≥ 0, got {}",
                self.gamma
            )));
        }
        if !(self.mu >= 0.0 && self.mu.is_finite()) {
            return Err(Error::param(format!(
                "μ must be a finite value ≥ 0, got {}",
                self.mu
            )));
        }
        if !(self.kappa0 > 0.0 && self.kappa0.is_finite()) {
            return Err(Error::param(format!(
                "κ₀ must be positive, got {}",
                self.kappa0
            )));
        }
        if !self.x0.is_finite() {
            return Err(Error::param("x₀ must be finite"));
        }
        Ok(())
    }

    /// The second regime with this `α`, validated.
    pub fn second_regime(&self) -> Result<Regime> {
        let r = Regime::Second { alpha: self.alpha };
        r.validate()?;
        Ok(r)
    }

    /// Spectral threshold `Λ` at semiclassical parameter `h`.
    pub fn threshold(&self, regime: Regime, h: f64) -> Result<f64> {
        regime.validate()?;
        let z1 = airy_zero(1)?;
        Ok(match regime {
            Regime::First => self.x0 + self.mu * h.powf(2.0 / 3.0),
            Regime::Second { alpha } => self.x0 + z1 * h.powf(2.0 / 3.0) + self.mu * h.powf(alpha),
        })
    }

    /// Factor turning `Tr(L − Λ)₋^γ` into a quantity with a finite limit.
    pub fn normalization(&self, regime: Regime, h: f64) -> f64 {
        match regime {
            Regime::First => h.powf((1.0 - 2.0 * self.gamma) / 3.0),
            Regime::Second { alpha } => h.powf(1.0 - alpha * (1.0 + self.gamma)),
        }
    }

    /// Energy unit in which Riesz means are measured: `h^{2/3}` or `h^α`.
    pub fn energy_scale(&self, regime: Regime, h: f64) -> f64 {
        match regime {
            Regime::First => h.powf(2.0 / 3.0),
            Regime::Second { alpha } => h.powf(alpha),
        }
    }
}

/// `L^cl_{γ,d} = Γ(γ+1) / ((4π)^{d/2} Γ(γ+1+d/2))`.
pub fn semiclassical_constant(gamma: f64, d: usize) -> Result<f64> {
    if !(gamma >= 0.0 && gamma.is_finite()) || d == 0 {
        return Err(Error::param(format!(
            "need γ ≥ 0 and d ≥ 1, got γ = {gamma}, d = {d}"
        )));
    }
    let half_d = d as f64 / 2.0;
    Ok(gamma_fn(gamma + 1.0) / ((4.0 * PI).powf(half_d) * gamma_fn(gamma + 1.0 + half_d)))
}

/// `L^cl_{0,d} ∫_ω (Λ − V)₊^{d/2}` over the box `ω = Π [lower_i, upper_i]`, `d ∈ {1, 2}`.
pub fn weyl_phase_space(
    v: impl Fn(&[f64]) -> f64,
    lower: &[f64],
    upper: &[f64],
    lambda: f64,
) -> Result<f64> {
    let d = lower.len();
    if d != upper.len() || !(1..=2).contains(&d) {
        return Err(Error::param(
            "phase-space integrals are supported in dimension 1 or 2",
        ));
    }
    if lower.iter().chain(upper).any(|x| !x.is_finite()) {
        return Err(Error::Range(
            "integral over an unbounded region diverges".into(),
        ));
    }
    let c = semiclassical_constant(0.0, d)?;
    let p = d as f64 / 2.0;
    let value = if d == 1 {
        integrate(
            |x| (lambda - v(&[x])).max(0.0).powf(p),
            lower[0],
            upper[0],
            QUAD_TOL,
            1e-12,
        )?
        .value
    } else {
        let inner = |x: f64| {
            integrate(
                |y| (lambda - v(&[x, y])).max(0.0),
                lower[1],
                upper[1],
                QUAD_TOL,
                1e-12,
            )
            .map(|r| r.value)
            .unwrap_or(f64::NAN)
        };
        let r = integrate(inner, lower[0], upper[0], QUAD_TOL, 1e-12)?.value;
        if r.is_nan() {
            return Err(Error::Tolerance("inner phase-space integral failed".into()));
        }
        r
    };
    if !value.is_finite() {
        return Err(Error::Range("phase-space integral is not finite".into()));
    }
    Ok(c * value)
}

/// `x₀ + z₁h^{2/3} + (2k−1)√(κ₀/2) h`.
pub fn three_term_eigenvalue(k: usize, h: f64, params: &LimitParams) -> Result<f64> {
    if k == 0 {
        return Err(Error::Range("eigenvalue index starts at 1".into()));
    }
    if !(h >= 0.0) {
        return Err(Error::param(format!("h must be non-negative, got {h}")));
    }
    let z1 = airy_zero(1)?;
    Ok(params.x0 + z1 * h.powf(2.0 / 3.0) + (2 * k - 1) as f64 * (params.kappa0 / 2.0).sqrt() * h)
}

/// `4π L^cl_{γ,2} / √(2κ₀) = 1 / ((γ+1)√(2κ₀))`.
fn riesz_prefactor(params: &LimitParams) -> Result<f64> {
    Ok(4.0 * PI * semiclassical_constant(params.gamma, 2)? / (2.0 * params.kappa0).sqrt())
}

/// `lim h^{(1−2γ)/3} Tr(L_h − x₀ − μh^{2/3})₋^γ = C_γ Σ_k (μ − z_k)₊^{γ+1}`.
pub fn counting_limit_first(params: &LimitParams) -> Result<f64> {
    params.validate()?;
    let sum: f64 = AiryZeroTable::shared()
        .below(params.mu)?
        .iter()
        .map(|z| (params.mu - z).powf(params.gamma + 1.0))
        .sum();
    Ok(riesz_prefactor(params)? * sum)
}

/// `lim h^{1−α(1+γ)} Tr(L_h − x₀ − z₁h^{2/3} − μh^α)₋^γ = C_γ μ^{γ+1}`.
pub fn counting_limit_second(params: &LimitParams) -> Result<f64> {
    params.validate()?;
    params.second_regime()?;
    Ok(riesz_prefactor(params)? * params.mu.powf(params.gamma + 1.0))
}

/// Leading large-`μ` term `4μ^{5/2} / (15π√(2κ₀))` of the first-regime count,
/// together with the scale `μ^{−3/4}` of its relative remainder.
pub fn rough_weyl(mu: f64, kappa0: f64) -> (f64, f64) {
    let value = 4.0 * mu.powf(2.5) / (15.0 * PI * (2.0 * kappa0).sqrt());
    (value, mu.powf(-0.75))
}

/// Pointwise weak limit of the rescaled projector density.
#[derive(Clone, Debug)]
pub struct DensityLimit {
    params: LimitParams,
    states: Vec<NormalizedAiryState>,
    regime: Regime,
}

impl DensityLimit {
    pub fn new(params: &LimitParams, regime: Regime) -> Result<Self> {
        params.validate()?;
        regime.validate()?;
        let states = match regime {
            Regime::First => {
                let n = AiryZeroTable::shared().below(params.mu)?.len();
                (1..=n)
                    .map(NormalizedAiryState::new)
                    .collect::<Result<_>>()?
            }
            Regime::Second { .. } => vec![NormalizedAiryState::new(1)?],
        };
        Ok(DensityLimit {
            params: *params,
            states,
            regime,
        })
    }

    /// `μ − z_k` in the first regime, `μ` in the second.
    fn level(&self, state: &NormalizedAiryState) -> f64 {
        match self.regime {
            Regime::First => self.params.mu - state.z_k(),
            Regime::Second { .. } => self.params.mu,
        }
    }

    pub fn eval(&self, s: f64, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        let q = 0.5 * self.params.kappa0 * s * s;
        self.states
            .iter()
            .map(|a| (self.level(a) - q).max(0.0).sqrt() * a.eval(t).powi(2))
            .sum::<f64>()
            / PI
    }

    /// `∫∫ V(s,t) ρ_lim(s,t) ds dt`, or the total mass when `v` is `None`.
    pub fn integrate(&self, v: Option<&TestPotential>) -> Result<f64> {
        let (s_sup, t_sup) = match v {
            Some(v) if v.is_zero() => return Ok(0.0),
            Some(v) => {
                let (s, t) = v.support();
                (s, t)
            }
            None => ([f64::NEG_INFINITY, f64::INFINITY], [0.0, f64::INFINITY]),
        };
        let mut total = 0.0;
        for a in &self.states {
            let c = self.level(a);
            if c <= 0.0 {
                continue;
            }
            let t_lo = t_sup[0].max(0.0);
            let t_hi = t_sup[1].min(a.z_k() + AIRY_TAIL);
            if t_hi <= t_lo {
                continue;
            }
            let inner = |s: f64| -> Result<f64> {
                Ok(integrate(
                    |t| v.map_or(1.0, |v| v.eval(s, t)) * a.eval(t).powi(2),
                    t_lo,
                    t_hi,
                    1e-13,
                    1e-12,
                )?
                .value)
            };
            let part = match v {
                None => {
                    let mass = inner(0.0)?;
                    semicircle_integral(c, self.params.kappa0, 0.5, s_sup, |_| Ok(1.0))? * mass
                }
                Some(_) => semicircle_integral(c, self.params.kappa0, 0.5, s_sup, inner)?,
            };
            total += part / PI;
        }
        Ok(total)
    }
}

/// Pointwise density limit; see [`DensityLimit`] for repeated evaluation.
pub fn density_limit(s: f64, t: f64, params: &LimitParams, regime: Regime) -> Result<f64> {
    Ok(DensityLimit::new(params, regime)?.eval(s, t))
}

/// `∫ (c − (κ₀/2)s²)₊^p g(s) ds` over `s ∈ range`, through `s = S sin φ`.
fn semicircle_integral(
    c: f64,
    kappa0: f64,
    p: f64,
    range: [f64; 2],
    g: impl Fn(f64) -> Result<f64>,
) -> Result<f64> {
    if c <= 0.0 {
        return Ok(0.0);
    }
    let big_s = (2.0 * c / kappa0).sqrt();
    let lo = (range[0] / big_s).clamp(-1.0, 1.0).asin();
    let hi = (range[1] / big_s).clamp(-1.0, 1.0).asin();
    if hi <= lo {
        return Ok(0.0);
    }
    let failure = std::cell::Cell::new(None);
    let r = integrate(
        |phi| {
            let cos = phi.cos();
            match g(big_s * phi.sin()) {
                Ok(v) => c.powf(p) * cos.powf(2.0 * p + 1.0) * big_s * v,
                Err(e) => {
                    failure.set(Some(e));
                    0.0
                }
            }
        },
        lo,
        hi,
        QUAD_TOL,
        1e-12,
    )?;
    match failure.into_inner() {
        Some(e) => Err(e),
        None => Ok(r.value),
    }
}

/// `∫₀^∞ V(s,t) a_k(t)² dt`.
pub fn first_order_shift(s: f64, v: &TestPotential, k: usize) -> Result<f64> {
    if v.is_zero() {
        return Ok(0.0);
    }
    let a = NormalizedAiryState::new(k)?;
    first_order_shift_with(s, v, &a)
}

fn first_order_shift_with(s: f64, v: &TestPotential, a: &NormalizedAiryState) -> Result<f64> {
    let (s_sup, t_sup) = v.support();
    if s < s_sup[0] || s > s_sup[1] {
        return Ok(0.0);
    }
    let t_lo = t_sup[0].max(0.0);
    let t_hi = t_sup[1].min(a.z_k() + AIRY_TAIL);
    if t_hi <= t_lo {
        return Ok(0.0);
    }
    Ok(integrate(
        |t| v.eval(s, t) * a.eval(t).powi(2),
        t_lo,
        t_hi,
        1e-13,
        1e-12,
    )?
    .value)
}

/// Eigenvalues below `bound` of `−d²/dt² + t + V(s,t)` on the half-line with a
/// Dirichlet condition at `t = 0`, Richardson-extrapolated from two grids.
pub fn slice_eigenvalues(s: f64, v: &TestPotential, bound: f64) -> Result<Vec<f64>> {
    let sup = v.sup_norm();
    let t_max = half_line_truncation(bound + sup);
    let n = (SLICE_DENSITY * t_max).ceil() as usize;
    let margin = 0.5;
    let coarse = slice_grid(s, v, t_max, n);
    let fine = slice_grid(s, v, t_max, 2 * n);
    let m = fine.sturm_count(bound + margin);
    let lo = -sup - 1.0;
    let hi = bound + margin + 1.0;
    let c = coarse.lowest_values(m, lo, hi, 1e-13);
    let f = fine.lowest_values(m, lo, hi, 1e-13);
    if coarse.sturm_count(hi) < m {
        return Err(Error::Resolution(format!(
            "coarse slice grid at s = {s} lost eigenvalues below {hi}"
        )));
    }
    Ok(c.iter()
        .zip(&f)
        .map(|(c, f)| (4.0 * f - c) / 3.0)
        .filter(|&l| l < bound)
        .collect())
}

fn slice_grid(s: f64, v: &TestPotential, t_max: f64, n: usize) -> Tridiagonal {
    let dt = t_max / n as f64;
    let c = 1.0 / (dt * dt);
    let diag = (1..n)
        .map(|i| {
            let t = i as f64 * dt;
            2.0 * c + t + v.eval(s, t)
        })
        .collect();
    Tridiagonal::new(diag, vec![-c; n - 2])
}

/// Perturbed Riesz-mean limit.
///
/// First regime: `L^cl_{γ,1} Σ_j ∫ (μ − (κ₀/2)s² − λ_j(s;V))₊^{γ+1/2} ds` with
/// `λ_j(s;V)` the eigenvalues of `−d²/dt² + t + V(s,·)`. Second regime: the
/// single band `(μ − (κ₀/2)s² − ∫V(s,t)a₁(t)²dt)₊^{γ+1/2}`.
///
/// Outside the `s`-support of `V` the slice eigenvalues are `z_j`, so the result
/// is the unperturbed integral over ℝ plus a correction over the support.
pub fn perturbed_counting_limit(
    params: &LimitParams,
    v: &TestPotential,
    regime: Regime,
) -> Result<f64> {
    params.validate()?;
    regime.validate()?;
    let p = params.gamma + 0.5;
    let kappa0 = params.kappa0;
    let mu = params.mu;
    let c1 = semiclassical_constant(params.gamma, 1)?;
    let band = |level: f64, s: f64| (level - 0.5 * kappa0 * s * s).max(0.0).powf(p);
    let whole_line = [f64::NEG_INFINITY, f64::INFINITY];
    let (s_sup, _) = v.support();
    let correction_range = |reach: f64| [s_sup[0].max(-reach), s_sup[1].min(reach)];
    let failure = std::cell::Cell::new(None);
    let guard = |r: Result<f64>| match r {
        Ok(x) => x,
        Err(e) => {
            failure.set(Some(e));
            0.0
        }
    };
    let total = match regime {
        Regime::First => {
            let zeros = AiryZeroTable::shared().below(mu)?;
            let mut free = 0.0;
            for z in zeros {
                free += semicircle_integral(mu - z, kappa0, p, whole_line, |_| Ok(1.0))?;
            }
            if v.is_zero() {
                free
            } else {
                let reach = (2.0 * (mu + v.sup_norm()) / kappa0).sqrt();
                let [a, b] = correction_range(reach);
                let correction = if b > a {
                    integrate(
                        |s| {
                            let level = mu - 0.5 * kappa0 * s * s;
                            guard(slice_eigenvalues(s, v, level).map(|ls| {
                                let perturbed: f64 =
                                    ls.iter().map(|l| (level - l).max(0.0).powf(p)).sum();
                                let bare: f64 = zeros.iter().map(|z| band(mu - z, s)).sum();
                                perturbed - bare
                            }))
                        },
                        a,
                        b,
                        1e-8,
                        1e-8,
                    )?
                    .value
                } else {
                    0.0
                };
                free + correction
            }
        }
        Regime::Second { .. } => {
            let free = semicircle_integral(mu, kappa0, p, whole_line, |_| Ok(1.0))?;
            if v.is_zero() {
                free
            } else {
                let a1 = NormalizedAiryState::new(1)?;
                let reach = (2.0 * (mu + v.sup_norm()) / kappa0).sqrt();
                let [a, b] = correction_range(reach);
                let correction = if b > a {
                    integrate(
                        |s| {
                            guard(
                                first_order_shift_with(s, v, &a1)
                                    .map(|shift| band(mu - shift, s) - band(mu, s)),
                            )
                        },
                        a,
                        b,
                        1e-9,
                        1e-9,
                    )?
                    .value
                } else {
                    0.0
                };
                free + correction
            }
        }
    };
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    Ok(c1 * total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn p(gamma: f64, mu: f64) -> LimitParams {
        LimitParams::new(gamma, mu, 1.0)
    }

    #[test]
    fn constants() {
        assert_abs_diff_eq!(
            semiclassical_constant(0.0, 2).unwrap(),
            0.0795775,
            epsilon = 1e-7
        );
        assert_abs_diff_eq!(
            semiclassical_constant(0.0, 1).unwrap(),
            std::f64::consts::FRAC_1_PI,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            semiclassical_constant(1.0, 1).unwrap(),
            0.2122066,
            epsilon = 1e-7
        );
        assert!(semiclassical_constant(-1.0, 1).is_err());
        assert!(semiclassical_constant(0.0, 0).is_err());
    }

    #[test]
    fn phase_space_examples() {
        let w = weyl_phase_space(|_| 0.0, &[0.0], &[1.0], 4.0).unwrap();
        assert_abs_diff_eq!(w, 2.0 / PI, epsilon = 1e-9);
        assert_eq!(weyl_phase_space(|_| 1.0, &[0.0], &[1.0], 0.5).unwrap(), 0.0);
        let z: f64 = 3.0;
        let r = (2.0 * z).sqrt();
        let w = weyl_phase_space(|x| 0.5 * x[0] * x[0], &[-r - 1.0], &[r + 1.0], z).unwrap();
        assert_abs_diff_eq!(w, z / 2f64.sqrt(), epsilon = 1e-7);
        assert!(weyl_phase_space(|_| 0.0, &[0.0], &[f64::INFINITY], 1.0).is_err());
        // two dimensions: L_{0,2}·Λ·|ω|
        let w = weyl_phase_space(|_| 0.0, &[0.0, 0.0], &[1.0, 2.0], 3.0).unwrap();
        assert_abs_diff_eq!(w, 6.0 / (4.0 * PI), epsilon = 1e-9);
    }

    #[test]
    fn three_term_examples() {
        let q = p(0.0, 0.0);
        assert_abs_diff_eq!(
            three_term_eigenvalue(1, 0.01, &q).unwrap(),
            0.115596400293639,
            epsilon = 1e-12
        );
        let gap = three_term_eigenvalue(2, 0.01, &q).unwrap()
            - three_term_eigenvalue(1, 0.01, &q).unwrap();
        assert_abs_diff_eq!(gap, 0.0141421, epsilon = 1e-7);
        assert_eq!(three_term_eigenvalue(3, 0.0, &q.with_x0(0.7)).unwrap(), 0.7);
        assert!(three_term_eigenvalue(0, 0.01, &q).is_err());
    }

    #[test]
    fn counting_limits() {
        assert_abs_diff_eq!(
            counting_limit_first(&p(0.0, 4.0)).unwrap(),
            1.17514,
            epsilon = 1e-5
        );
        assert_eq!(counting_limit_first(&p(0.0, 2.0)).unwrap(), 0.0);
        assert_abs_diff_eq!(
            counting_limit_first(&p(1.0, 5.0)).unwrap(),
            2.79926,
            epsilon = 1e-5
        );
        assert_abs_diff_eq!(
            counting_limit_second(&p(0.0, 1.0)).unwrap(),
            std::f64::consts::FRAC_1_SQRT_2,
            epsilon = 1e-12
        );
        assert_eq!(counting_limit_second(&p(0.0, 0.0)).unwrap(), 0.0);
        assert_abs_diff_eq!(
            counting_limit_second(&p(1.0, 2.0)).unwrap(),
            std::f64::consts::SQRT_2,
            epsilon = 1e-12
        );
        assert!(counting_limit_second(&p(0.0, 1.0).with_alpha(0.5)).is_err());
        let a = counting_limit_second(&p(0.5, 1.3).with_alpha(0.7)).unwrap();
        let b = counting_limit_second(&p(0.5, 1.3).with_alpha(0.95)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn rough_weyl_examples() {
        let (v, scale) = rough_weyl(50.0, 1.0);
        assert_abs_diff_eq!(v, 1061.03, epsilon = 0.01);
        assert_abs_diff_eq!(scale, 50f64.powf(-0.75), epsilon = 1e-15);
        assert_eq!(rough_weyl(0.0, 1.0).0, 0.0);
        let ratio = counting_limit_first(&p(0.0, 50.0)).unwrap() / v;
        assert!((ratio - 1.0).abs() <= 0.15);
    }

    #[test]
    fn consistency_chain() {
        // Σ_k L_{0,1}∫(μ − z_k − s²/2)₊^{1/2} ds = ∫∫ ρ_lim = counting limit
        let q = p(0.0, 7.3);
        let direct = counting_limit_first(&q).unwrap();
        let zeros = AiryZeroTable::shared().below(q.mu).unwrap();
        let mut phase = 0.0;
        for z in zeros {
            let r = (2.0 * (q.mu - z)).sqrt();
            phase += weyl_phase_space(|x| z + 0.5 * x[0] * x[0], &[-r], &[r], q.mu).unwrap();
        }
        let mass = DensityLimit::new(&q, Regime::First)
            .unwrap()
            .integrate(None)
            .unwrap();
        assert!((phase - direct).abs() < 1e-8, "{phase} vs {direct}");
        assert!((mass - direct).abs() < 1e-8, "{mass} vs {direct}");
    }

    #[test]
    fn density_examples() {
        let q = p(0.0, 3.0);
        let a1 = NormalizedAiryState::new(1).unwrap();
        let t = 1.1;
        let d = density_limit(0.0, t, &q, Regime::First).unwrap();
        assert_abs_diff_eq!(d, 0.258966 * a1.eval(t).powi(2), epsilon = 1e-6);
        assert_eq!(
            density_limit(0.3, t, &p(0.0, 2.0), Regime::First).unwrap(),
            0.0
        );
        let second = Regime::Second { alpha: 0.8 };
        assert_eq!(density_limit(0.3, t, &p(0.0, 0.0), second).unwrap(), 0.0);
    }

    #[test]
    fn shift_examples() {
        assert_eq!(
            first_order_shift(0.0, &TestPotential::zero(), 1).unwrap(),
            0.0
        );
        let a1 = NormalizedAiryState::new(1).unwrap();
        let boxed = TestPotential::constant_box(2.0, [-1.0, 1.0], [0.0, 1.5]);
        let mass = integrate(|t| a1.eval(t).powi(2), 0.0, 1.5, 1e-14, 1e-13)
            .unwrap()
            .value;
        assert_abs_diff_eq!(
            first_order_shift(0.2, &boxed, 1).unwrap(),
            2.0 * mass,
            epsilon = 1e-10
        );
        assert_eq!(first_order_shift(1.2, &boxed, 1).unwrap(), 0.0);
        let near = TestPotential::product_bump(1.0, [0.0, 1.0], [1.0, 0.8]);
        let s1 = first_order_shift(0.0, &near, 1).unwrap();
        let s2 = first_order_shift(0.0, &near, 2).unwrap();
        assert!((s1 - s2).abs() > 1e-3);
    }

    #[test]
    fn slice_solver_reproduces_airy_zeros() {
        let ls = slice_eigenvalues(0.0, &TestPotential::zero(), 6.0).unwrap();
        assert_eq!(ls.len(), 3);
        for (k, l) in ls.iter().enumerate() {
            assert_abs_diff_eq!(*l, airy_zero(k + 1).unwrap(), epsilon = 1e-8);
        }
    }

    #[test]
    fn perturbed_reduces_to_unperturbed() {
        let zero = TestPotential::zero();
        for (g, mu) in [(0.0, 4.0), (1.0, 5.0), (0.5, 6.2)] {
            let q = p(g, mu);
            let a = perturbed_counting_limit(&q, &zero, Regime::First).unwrap();
            assert!((a - counting_limit_first(&q).unwrap()).abs() < 1e-8);
            let second = q.second_regime().unwrap();
            let b = perturbed_counting_limit(&q, &zero, second).unwrap();
            assert!((b - counting_limit_second(&q).unwrap()).abs() < 1e-8);
        }
    }

    #[test]
    fn second_regime_t_only_potential() {
        // V = V(t) on a wide s-box: the shift is constant and the band integral is explicit
        let w = TestPotential::constant_box(0.3, [-50.0, 50.0], [0.0, 2.0]);
        let q = p(0.0, 1.0);
        let shift = first_order_shift(0.0, &w, 1).unwrap();
        let expected = (q.mu - shift) / (2.0 * q.kappa0).sqrt();
        let got = perturbed_counting_limit(&q, &w, q.second_regime().unwrap()).unwrap();
        assert_abs_diff_eq!(got, expected, epsilon = 1e-7);
    }

    #[test]
    fn sign_of_perturbation() {
        let q = p(0.0, 4.0);
        let v = TestPotential::gaussian(0.5, [0.0, 1.5], [0.6, 0.8]);
        let base = counting_limit_first(&q).unwrap();
        let up = perturbed_counting_limit(&q, &v, Regime::First).unwrap();
        let down = perturbed_counting_limit(&q, &v.scaled(-1.0), Regime::First).unwrap();
        assert!(up < base && base < down, "{up} {base} {down}");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(6))]

        #[test]
        fn perturbation_degenerates_linearly(eps in 0.01f64..0.05) {
            let q = p(0.0, 1.0);
            let v = TestPotential::product_bump(1.0, [0.0, 1.0], [0.7, 0.9]);
            let second = q.second_regime().unwrap();
            let base = counting_limit_second(&q).unwrap();
            let d1 = perturbed_counting_limit(&q, &v.scaled(eps), second).unwrap() - base;
            let d2 = perturbed_counting_limit(&q, &v.scaled(2.0 * eps), second).unwrap() - base;
            prop_assert!(d1 < 0.0);
            prop_assert!((d2 / d1 - 2.0).abs() < 0.05);
        }
    }
}

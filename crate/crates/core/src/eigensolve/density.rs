//! Diagonal of the spectral projector and its pairing with rescaled potentials.

use super::Spectrum;
use crate::error::{Error, Result};
use crate::operators::{Chart, DiscreteOperator, Regime, RescaledPotential};

/// `ρ(x) = Σ_{λ_j<Λ} |u_j(x)|²` sampled at the grid nodes.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityField {
    pub chart: Chart,
    pub values: Vec<f64>,
    pub weights: Vec<f64>,
    /// Number of eigenfunctions summed.
    pub count: usize,
    pub threshold: f64,
    pub h: Option<f64>,
}

impl DensityField {
    /// `∫ρ`, equal to `count` up to rounding.
    pub fn integral(&self) -> f64 {
        self.values
            .iter()
            .zip(&self.weights)
            .map(|(r, w)| r * w)
            .sum()
    }
}

/// Projector density below `threshold` from a spectrum computed with eigenvectors.
pub fn projector_density(
    op: &DiscreteOperator,
    spec: &Spectrum,
    threshold: f64,
) -> Result<DensityField> {
    let vectors = spec
        .eigenvectors
        .as_ref()
        .ok_or_else(|| Error::Integrity("spectrum was computed without eigenvectors".into()))?;
    if threshold > spec.threshold || !spec.is_certified() {
        return Err(Error::Integrity(format!(
            "spectrum is certified only below {}, requested {threshold}",
            spec.threshold
        )));
    }
    let w = op.weights();
    if vectors.first().is_some_and(|v| v.len() != w.len()) {
        return Err(Error::param("spectrum does not belong to this operator"));
    }
    let mut values = vec![0.0; w.len()];
    let mut count = 0;
    for (lambda, v) in spec.eigenvalues.iter().zip(vectors) {
        if *lambda >= threshold {
            continue;
        }
        count += 1;
        for ((r, x), wi) in values.iter_mut().zip(v).zip(w) {
            *r += x * x / wi;
        }
    }
    Ok(DensityField {
        chart: op.chart().clone(),
        values,
        weights: w.to_vec(),
        count,
        threshold,
        h: op.semiclassical_h(),
    })
}

/// `∫ V_h ρ dx` in physical and rescaled coordinates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Pairing {
    /// `∫ V_h(x) ρ(x) dx`.
    pub raw: f64,
    /// The same integral after the change of variables `s = ℓ_s σ`, `t = h^{2/3} τ`.
    pub rescaled: f64,
    /// Power `p` of `h` multiplying `rescaled`: `4/3` or `5/3 − α/2`.
    pub exponent: f64,
    /// `h^p · rescaled`, which has a finite semiclassical limit.
    pub normalized: f64,
    pub regime: Regime,
}

/// Pairs a window density with a rescaled potential.
pub fn pair_density(rho: &DensityField, v: &RescaledPotential) -> Result<Pairing> {
    let h = v.h();
    if let Some(hr) = rho.h {
        if ((hr - h) / h).abs() > 1e-12 {
            return Err(Error::param(format!(
                "density computed at h = {hr}, potential at h = {h}"
            )));
        }
    }
    let (coords, ns, nt) = match &rho.chart {
        Chart::Window { coords, ns, nt } => (coords, *ns, *nt),
        other => {
            return Err(Error::Coverage(format!(
                "density pairing needs a window chart, got {}",
                other.kind()
            )))
        }
    };
    let (mut s_lo, mut s_hi, mut t_hi) = (f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
    for p in coords {
        s_lo = s_lo.min(p[0]);
        s_hi = s_hi.max(p[0]);
        t_hi = t_hi.max(p[1]);
    }
    let ds = (s_hi - s_lo) / (ns.max(2) - 1) as f64;
    let dt = t_hi / nt.max(1) as f64;
    let (sup_s, sup_t) = v.support();
    if sup_s[0] < s_lo - ds * 1.0001
        || sup_s[1] > s_hi + ds * 1.0001
        || sup_t[1] > t_hi + dt * 1.0001
    {
        return Err(Error::Coverage(format!(
            "potential support s ∈ [{:.4e}, {:.4e}], t ≤ {:.4e} exceeds the window s ∈ [{s_lo:.4e}, {s_hi:.4e}], t ≤ {t_hi:.4e}",
            sup_s[0], sup_s[1], sup_t[1]
        )));
    }
    let raw: f64 = coords
        .iter()
        .zip(&rho.values)
        .zip(&rho.weights)
        .map(|((p, r), w)| v.eval(p[0], p[1]) * r * w)
        .sum();
    let (ls, lt) = v.scales();
    let rescaled = raw / (ls * lt);
    let exponent = match v.regime() {
        Regime::First => 4.0 / 3.0,
        Regime::Second { alpha } => 5.0 / 3.0 - alpha / 2.0,
    };
    Ok(Pairing {
        raw,
        rescaled,
        exponent,
        normalized: h.powf(exponent) * rescaled,
        regime: v.regime(),
    })
}

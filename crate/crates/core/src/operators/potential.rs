//! Test potentials on the half-plane `{(s,t): t > 0}` and their semiclassical
//! rescalings onto the boundary window.

use serde::{Deserialize, Serialize};

use super::Regime;
use crate::error::{Error, Result};

/// Truncation radius, in standard deviations, of the Gaussian bump.
const GAUSSIAN_CUTOFF: f64 = 6.0;

/// Profile of a test potential.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum PotentialShape {
    Zero,
    /// `A exp(−(s−s_c)²/2σ_s² − (t−t_c)²/2σ_t²)`, cut off outside `±6σ`.
    Gaussian {
        amplitude: f64,
        center: [f64; 2],
        sigma: [f64; 2],
    },
    /// `A b((s−s_c)/r_s) b((t−t_c)/r_t)` with `b(x) = exp(1 − 1/(1−x²))` on `|x| < 1`.
    ProductBump {
        amplitude: f64,
        center: [f64; 2],
        radius: [f64; 2],
    },
    /// Constant on the box `[s0, s1] × [t0, t1]`.
    Box {
        value: f64,
        s: [f64; 2],
        t: [f64; 2],
    },
}

/// A bounded, compactly supported potential `V(s,t)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TestPotential {
    pub shape: PotentialShape,
}

fn bump(x: f64) -> f64 {
    if x.abs() >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - x * x)).exp()
    }
}

impl TestPotential {
    pub fn zero() -> Self {
        TestPotential {
            shape: PotentialShape::Zero,
        }
    }

    pub fn gaussian(amplitude: f64, center: [f64; 2], sigma: [f64; 2]) -> Self {
        TestPotential {
            shape: PotentialShape::Gaussian {
                amplitude,
                center,
                sigma,
            },
        }
    }

    pub fn product_bump(amplitude: f64, center: [f64; 2], radius: [f64; 2]) -> Self {
        TestPotential {
            shape: PotentialShape::ProductBump {
                amplitude,
                center,
                radius,
            },
        }
    }

    pub fn constant_box(value: f64, s: [f64; 2], t: [f64; 2]) -> Self {
        TestPotential {
            shape: PotentialShape::Box { value, s, t },
        }
    }

    /// Finite parameters, positive widths and ordered box edges.
    pub fn validate(&self) -> Result<()> {
        let finite = |xs: &[f64]| xs.iter().all(|x| x.is_finite());
        let ok = match &self.shape {
            PotentialShape::Zero => true,
            PotentialShape::Gaussian {
                amplitude,
                center,
                sigma: w,
            }
            | PotentialShape::ProductBump {
                amplitude,
                center,
                radius: w,
            } => {
                finite(&[*amplitude, center[0], center[1]])
                    && w.iter().all(|&x| x > 0.0 && x.is_finite())
            }
            PotentialShape::Box { value, s, t } => {
                finite(&[*value, s[0], s[1], t[0], t[1]]) && s[0] < s[1] && t[0] < t[1]
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::param(format!(
                "invalid test potential {:?}",
                self.shape
            )))
        }
    }

    pub fn is_zero(&self) -> bool {
        match &self.shape {
            PotentialShape::Zero => true,
            PotentialShape::Gaussian { amplitude, .. }
            | PotentialShape::ProductBump { amplitude, .. } => *amplitude == 0.0,
            PotentialShape::Box { value, .. } => *value == 0.0,
        }
    }

    pub fn eval(&self, s: f64, t: f64) -> f64 {
        if t < 0.0 {
            return 0.0;
        }
        match &self.shape {
            PotentialShape::Zero => 0.0,
            PotentialShape::Gaussian {
                amplitude,
                center,
                sigma,
            } => {
                let a = (s - center[0]) / sigma[0];
                let b = (t - center[1]) / sigma[1];
                if a.abs() > GAUSSIAN_CUTOFF || b.abs() > GAUSSIAN_CUTOFF {
                    0.0
                } else {
                    amplitude * (-0.5 * (a * a + b * b)).exp()
                }
            }
            PotentialShape::ProductBump {
                amplitude,
                center,
                radius,
            } => amplitude * bump((s - center[0]) / radius[0]) * bump((t - center[1]) / radius[1]),
            PotentialShape::Box {
                value,
                s: sb,
                t: tb,
            } => {
                if (sb[0]..=sb[1]).contains(&s) && (tb[0]..=tb[1]).contains(&t) {
                    *value
                } else {
                    0.0
                }
            }
        }
    }

    /// Closed support box `([s0, s1], [t0, t1])`, intersected with `t ≥ 0`.
    pub fn support(&self) -> ([f64; 2], [f64; 2]) {
        let (s, t) = match &self.shape {
            PotentialShape::Zero => ([0.0, 0.0], [0.0, 0.0]),
            PotentialShape::Gaussian { center, sigma, .. } => (
                [
                    center[0] - GAUSSIAN_CUTOFF * sigma[0],
                    center[0] + GAUSSIAN_CUTOFF * sigma[0],
                ],
                [
                    center[1] - GAUSSIAN_CUTOFF * sigma[1],
                    center[1] + GAUSSIAN_CUTOFF * sigma[1],
                ],
            ),
            PotentialShape::ProductBump { center, radius, .. } => (
                [center[0] - radius[0], center[0] + radius[0]],
                [center[1] - radius[1], center[1] + radius[1]],
            ),
            PotentialShape::Box { s, t, .. } => (*s, *t),
        };
        (s, [t[0].max(0.0), t[1].max(0.0)])
    }

    /// `sup |V|` over `t ≥ 0`.
    pub fn sup_norm(&self) -> f64 {
        match &self.shape {
            PotentialShape::Zero => 0.0,
            // the maximum sits at the centre, or on t = 0 if the centre lies below it
            PotentialShape::Gaussian { center, .. }
            | PotentialShape::ProductBump { center, .. } => {
                self.eval(center[0], center[1].max(0.0)).abs()
            }
            PotentialShape::Box { value, t, .. } => {
                if t[1] >= 0.0 {
                    value.abs()
                } else {
                    0.0
                }
            }
        }
    }

    /// `c · V`.
    pub fn scaled(&self, c: f64) -> Self {
        let shape = match &self.shape {
            PotentialShape::Zero => PotentialShape::Zero,
            PotentialShape::Gaussian {
                amplitude,
                center,
                sigma,
            } => PotentialShape::Gaussian {
                amplitude: c * amplitude,
                center: *center,
                sigma: *sigma,
            },
            PotentialShape::ProductBump {
                amplitude,
                center,
                radius,
            } => PotentialShape::ProductBump {
                amplitude: c * amplitude,
                center: *center,
                radius: *radius,
            },
            PotentialShape::Box { value, s, t } => PotentialShape::Box {
                value: c * value,
                s: *s,
                t: *t,
            },
        };
        TestPotential { shape }
    }
}

/// `V_h` or `V_{h,α}` expressed in physical window coordinates `(s, t)`, together
/// with the energy prefactor (`h^{2/3}` or `h^α`) it enters the operator with.
#[derive(Clone, Debug, PartialEq)]
pub struct RescaledPotential {
    base: TestPotential,
    h: f64,
    regime: Regime,
}

/// Rescales `V` onto the window for the given regime.
pub fn rescale_potential(v: &TestPotential, h: f64, regime: Regime) -> Result<RescaledPotential> {
    regime.validate()?;
    if !(h > 0.0) {
        return Err(crate::error::Error::param(format!(
            "h must be positive, got {h}"
        )));
    }
    Ok(RescaledPotential {
        base: v.clone(),
        h,
        regime,
    })
}

impl RescaledPotential {
    pub fn base(&self) -> &TestPotential {
        &self.base
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn regime(&self) -> Regime {
        self.regime
    }

    /// Length scales `(ℓ_s, ℓ_t)` with `V_h(s,t) = V(s/ℓ_s, t/ℓ_t)`.
    pub fn scales(&self) -> (f64, f64) {
        let ls = match self.regime {
            Regime::First => self.h.powf(1.0 / 3.0),
            Regime::Second { alpha } => self.h.powf(alpha / 2.0),
        };
        (ls, self.h.powf(2.0 / 3.0))
    }

    /// Prefactor with which the potential is added to `−h²Δ + x₁`.
    pub fn energy_coefficient(&self) -> f64 {
        match self.regime {
            Regime::First => self.h.powf(2.0 / 3.0),
            Regime::Second { alpha } => self.h.powf(alpha),
        }
    }

    pub fn eval(&self, s: f64, t: f64) -> f64 {
        let (ls, lt) = self.scales();
        self.base.eval(s / ls, t / lt)
    }

    /// Support box in physical window coordinates.
    pub fn support(&self) -> ([f64; 2], [f64; 2]) {
        let (ls, lt) = self.scales();
        let (s, t) = self.base.support();
        ([s[0] * ls, s[1] * ls], [t[0] * lt, t[1] * lt])
    }
}

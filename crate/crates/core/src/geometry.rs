//! Built-in planar domains, their arc-length boundary charts anchored at the
//! point `X₀` minimising the first coordinate, and tubular coordinates
//! `τ(s,t) = γ(s) − t n(s)` with Jacobian `m = 1 − κ(s) t`.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::gauss_legendre_nodes;

/// Shape of a built-in domain, before translation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DomainKind {
    Disk {
        radius: f64,
    },
    Ellipse {
        a: f64,
        b: f64,
    },
    /// Polar radius `r(φ) = c₀ + Σ_j (c_{2j−1} cos jφ + c_{2j} sin jφ)`.
    FourierStar {
        coefficients: Vec<f64>,
    },
}

/// A domain: shape plus the position of its centre.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DomainSpec {
    #[serde(flatten)]
    pub kind: DomainKind,
    #[serde(default)]
    pub center: [f64; 2],
}

impl DomainSpec {
    pub fn disk(radius: f64, center: [f64; 2]) -> Self {
        DomainSpec {
            kind: DomainKind::Disk { radius },
            center,
        }
    }

    pub fn ellipse(a: f64, b: f64, center: [f64; 2]) -> Self {
        DomainSpec {
            kind: DomainKind::Ellipse { a, b },
            center,
        }
    }

    pub fn fourier_star(coefficients: Vec<f64>, center: [f64; 2]) -> Self {
        DomainSpec {
            kind: DomainKind::FourierStar { coefficients },
            center,
        }
    }

    /// Unit disk touching the origin from the right: `X₀ = 0`, `κ₀ = 1`.
    pub fn unit_disk() -> Self {
        Self::disk(1.0, [1.0, 0.0])
    }

    pub fn validate(&self) -> Result<()> {
        if !self.center.iter().all(|c| c.is_finite()) {
            return Err(Error::param("domain centre must be finite"));
        }
        match &self.kind {
            DomainKind::Disk { radius } if !(*radius > 0.0 && radius.is_finite()) => Err(
                Error::param(format!("disk radius must be positive, got {radius}")),
            ),
            DomainKind::Ellipse { a, b }
                if !(*a > 0.0 && *b > 0.0 && a.is_finite() && b.is_finite()) =>
            {
                Err(Error::param(format!(
                    "ellipse semi-axes must be positive, got {a}, {b}"
                )))
            }
            DomainKind::FourierStar { coefficients } => {
                if coefficients.is_empty() || !coefficients.iter().all(|c| c.is_finite()) {
                    return Err(Error::param("Fourier star needs finite coefficients"));
                }
                let min_r = (0..2048)
                    .map(|i| star_radius(coefficients, TAU * i as f64 / 2048.0).0)
                    .fold(f64::INFINITY, f64::min);
                if min_r <= 0.0 {
                    return Err(Error::param("Fourier star radius must stay positive"));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// Point of the closed parameterisation and its first two derivatives in `φ`.
    fn param(&self, phi: f64) -> ([f64; 2], [f64; 2], [f64; 2]) {
        let (c, s) = (phi.cos(), phi.sin());
        let [cx, cy] = self.center;
        match &self.kind {
            DomainKind::Disk { radius: r } => {
                ([cx + r * c, cy + r * s], [-r * s, r * c], [-r * c, -r * s])
            }
            DomainKind::Ellipse { a, b } => {
                ([cx + a * c, cy + b * s], [-a * s, b * c], [-a * c, -b * s])
            }
            DomainKind::FourierStar { coefficients } => {
                let (r, dr, ddr) = star_radius(coefficients, phi);
                (
                    [cx + r * c, cy + r * s],
                    [dr * c - r * s, dr * s + r * c],
                    [
                        ddr * c - 2.0 * dr * s - r * c,
                        ddr * s + 2.0 * dr * c - r * s,
                    ],
                )
            }
        }
    }

    /// Level function, negative inside the domain and positive outside.
    pub fn level(&self, p: [f64; 2]) -> f64 {
        let x = p[0] - self.center[0];
        let y = p[1] - self.center[1];
        match &self.kind {
            DomainKind::Disk { radius } => x.hypot(y) - radius,
            DomainKind::Ellipse { a, b } => (x / a).hypot(y / b) - 1.0,
            DomainKind::FourierStar { coefficients } => {
                x.hypot(y) - star_radius(coefficients, y.atan2(x)).0
            }
        }
    }

    /// Axis-aligned bounding box `([xmin, ymin], [xmax, ymax])`.
    pub fn bounding_box(&self) -> ([f64; 2], [f64; 2]) {
        let [cx, cy] = self.center;
        let (rx, ry) = match &self.kind {
            DomainKind::Disk { radius } => (*radius, *radius),
            DomainKind::Ellipse { a, b } => (*a, *b),
            DomainKind::FourierStar { coefficients } => {
                let r = (0..4096)
                    .map(|i| star_radius(coefficients, TAU * i as f64 / 4096.0).0)
                    .fold(0.0, f64::max);
                (r * 1.01, r * 1.01)
            }
        };
        ([cx - rx, cy - ry], [cx + rx, cy + ry])
    }
}

fn star_radius(coefficients: &[f64], phi: f64) -> (f64, f64, f64) {
    let mut r = coefficients[0];
    let mut dr = 0.0;
    let mut ddr = 0.0;
    for (idx, pair) in coefficients[1..].chunks(2).enumerate() {
        let j = (idx + 1) as f64;
        let a = pair[0];
        let b = pair.get(1).copied().unwrap_or(0.0);
        let (c, s) = ((j * phi).cos(), (j * phi).sin());
        r += a * c + b * s;
        dr += j * (-a * s + b * c);
        ddr -= j * j * (a * c + b * s);
    }
    (r, dr, ddr)
}

/// Number of φ panels of the arc-length table.
const ARC_PANELS: usize = 4096;
const ARC_ORDER: usize = 10;

/// Arc-length parameterised boundary with `γ(0) = X₀`, oriented counter-clockwise.
#[derive(Clone, Debug)]
pub struct BoundaryCurve {
    spec: DomainSpec,
    phi0: f64,
    cumulative: Vec<f64>,
    length: f64,
    x0_point: [f64; 2],
    kappa0: f64,
    nodes: (Vec<f64>, Vec<f64>),
}

/// Boundary data at one arc-length position.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CurvePoint {
    pub point: [f64; 2],
    pub tangent: [f64; 2],
    /// Outward unit normal.
    pub normal: [f64; 2],
    pub kappa: f64,
}

/// Construct the boundary chart of a domain, locating `X₀` and `κ₀`.
pub fn build_domain(spec: &DomainSpec) -> Result<BoundaryCurve> {
    spec.validate()?;
    let phi0 = locate_minimizer(spec)?;
    let nodes = gauss_legendre_nodes(ARC_ORDER);
    let speed = |phi: f64| {
        let d = spec.param(phi).1;
        d[0].hypot(d[1])
    };
    let dphi = TAU / ARC_PANELS as f64;
    let mut cumulative = Vec::with_capacity(ARC_PANELS + 1);
    cumulative.push(0.0);
    let mut acc = 0.0;
    for j in 0..ARC_PANELS {
        let a = phi0 + j as f64 * dphi;
        acc += panel_integral(&nodes, &speed, a, a + dphi);
        cumulative.push(acc);
    }
    let (p, d1, d2) = spec.param(phi0);
    let kappa0 = signed_curvature(d1, d2);
    if !(kappa0 > 1e-8) {
        return Err(Error::DomainAssumption(format!(
            "boundary curvature at the minimiser must be positive, got {kappa0:e}"
        )));
    }
    Ok(BoundaryCurve {
        spec: spec.clone(),
        phi0,
        length: acc,
        cumulative,
        x0_point: p,
        kappa0,
        nodes,
    })
}

fn panel_integral(nodes: &(Vec<f64>, Vec<f64>), f: &impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    nodes
        .0
        .iter()
        .zip(&nodes.1)
        .map(|(x, w)| w * f(mid + half * x))
        .sum::<f64>()
        * half
}

fn signed_curvature(d1: [f64; 2], d2: [f64; 2]) -> f64 {
    (d1[0] * d2[1] - d1[1] * d2[0]) / d1[0].hypot(d1[1]).powi(3)
}

/// Parameter of the unique global minimiser of the first coordinate.
fn locate_minimizer(spec: &DomainSpec) -> Result<f64> {
    const SAMPLES: usize = 8192;
    let xs: Vec<f64> = (0..SAMPLES)
        .map(|i| spec.param(TAU * i as f64 / SAMPLES as f64).0[0])
        .collect();
    let (imin, &xmin) = xs
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .unwrap();
    let scale = {
        let (lo, hi) = spec.bounding_box();
        (hi[0] - lo[0]).max(hi[1] - lo[1])
    };
    // other sampled local minima at (numerically) the same height mean the
    // minimiser is not unique, or the boundary is flat there
    for i in 0..SAMPLES {
        let prev = xs[(i + SAMPLES - 1) % SAMPLES];
        let next = xs[(i + 1) % SAMPLES];
        let cyclic_gap = (i as isize - imin as isize).unsigned_abs();
        let gap = cyclic_gap.min(SAMPLES - cyclic_gap);
        if gap > 2 && xs[i] <= prev && xs[i] <= next && xs[i] - xmin <= 1e-9 * scale {
            return Err(Error::DomainAssumption(format!(
                "x₁-minimiser is not unique (near-minimal points at φ = {:.6} and {:.6})",
                TAU * imin as f64 / SAMPLES as f64,
                TAU * i as f64 / SAMPLES as f64
            )));
        }
    }
    // Newton on x'(φ) = 0, guarded by the sampling bracket
    let step = TAU / SAMPLES as f64;
    let (mut lo, mut hi) = ((imin as f64 - 1.0) * step, (imin as f64 + 1.0) * step);
    let mut phi = imin as f64 * step;
    for _ in 0..100 {
        let (_, d1, d2) = spec.param(phi);
        let g = d1[0];
        if g > 0.0 {
            hi = phi;
        } else {
            lo = phi;
        }
        let mut next = if d2[0] > 0.0 {
            phi - g / d2[0]
        } else {
            f64::NAN
        };
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - phi).abs() < 1e-15 {
            phi = next;
            break;
        }
        phi = next;
    }
    Ok(phi.rem_euclid(TAU))
}

impl BoundaryCurve {
    pub fn spec(&self) -> &DomainSpec {
        &self.spec
    }

    /// Perimeter.
    pub fn length(&self) -> f64 {
        self.length
    }

    /// `X₀`.
    pub fn x0_point(&self) -> [f64; 2] {
        self.x0_point
    }

    /// `x₀`, the first coordinate of `X₀` (minimum of `x₁` over the closure).
    pub fn x0(&self) -> f64 {
        self.x0_point[0]
    }

    /// Curvature at `X₀`.
    pub fn kappa0(&self) -> f64 {
        self.kappa0
    }

    /// Closed-curve parameter corresponding to arc length `s` (measured from `X₀`).
    fn phi_of(&self, s: f64) -> f64 {
        let sigma = s.rem_euclid(self.length);
        let j = self
            .cumulative
            .partition_point(|&c| c <= sigma)
            .clamp(1, ARC_PANELS)
            - 1;
        let dphi = TAU / ARC_PANELS as f64;
        let a = self.phi0 + j as f64 * dphi;
        let speed = |phi: f64| {
            let d = self.spec.param(phi).1;
            d[0].hypot(d[1])
        };
        let target = sigma - self.cumulative[j];
        let mut phi = a + target / speed(a);
        for _ in 0..6 {
            let f = panel_integral(&self.nodes, &speed, a, phi) - target;
            let step = f / speed(phi);
            phi -= step;
            if step.abs() < 1e-16 {
                break;
            }
        }
        phi
    }

    pub fn at(&self, s: f64) -> CurvePoint {
        let (point, d1, d2) = self.spec.param(self.phi_of(s));
        let speed = d1[0].hypot(d1[1]);
        let tangent = [d1[0] / speed, d1[1] / speed];
        CurvePoint {
            point,
            tangent,
            normal: [tangent[1], -tangent[0]],
            kappa: signed_curvature(d1, d2),
        }
    }

    /// `γ(s)`.
    pub fn gamma(&self, s: f64) -> [f64; 2] {
        self.at(s).point
    }

    /// `κ(s)`, positive where the domain is convex.
    pub fn kappa(&self, s: f64) -> f64 {
        self.at(s).kappa
    }

    /// Angle `θ(s)` of the outward normal, continuous on `(−L/2, L/2)` with `θ(0) = π`
    /// for convex domains.
    pub fn theta(&self, s: f64) -> f64 {
        let n = self.at(s).normal;
        n[1].atan2(n[0]).rem_euclid(TAU)
    }
}

/// Tubular chart over the rectangle `(−s_half, s_half) × [0, t_max)`.
#[derive(Clone, Debug)]
pub struct TubularMap {
    chart: Chart,
    s_half: f64,
    t_max: f64,
}

#[derive(Clone, Debug)]
enum Chart {
    Curve(BoundaryCurve),
    /// Half-plane `{x₁ > 0}` with `τ(s,t) = (t, s)`; a synthetic straight boundary.
    Flat,
}

/// Output of [`TubularMap::eval`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TubularPoint {
    pub point: [f64; 2],
    pub tau1: f64,
    pub m: f64,
}

/// Lower bound on the Jacobian inside the strip.
const MIN_JACOBIAN: f64 = 0.1;

impl TubularMap {
    /// Largest strip with `m > 0.1` on which `τ` is injective on a test mesh.
    pub fn new(curve: BoundaryCurve) -> Result<Self> {
        let samples = 2048;
        let kappa_max = (0..samples)
            .map(|i| curve.kappa(curve.length() * i as f64 / samples as f64))
            .fold(0.0, f64::max);
        let mut t_max = (1.0 - MIN_JACOBIAN) / kappa_max;
        let mut s_half = 0.45 * curve.length();
        for _ in 0..40 {
            if injective_on_mesh(&curve, s_half, t_max) {
                return Ok(TubularMap {
                    chart: Chart::Curve(curve),
                    s_half,
                    t_max,
                });
            }
            s_half *= 0.8;
            t_max *= 0.8;
        }
        Err(Error::DomainAssumption(
            "no injective tubular neighbourhood found".into(),
        ))
    }

    /// Explicit strip; fails if `m ≤ 0.1` somewhere or injectivity is violated.
    pub fn with_extents(curve: BoundaryCurve, s_half: f64, t_max: f64) -> Result<Self> {
        if !(s_half > 0.0 && t_max > 0.0) || s_half >= 0.5 * curve.length() {
            return Err(Error::param(format!(
                "invalid strip extents s_half = {s_half}, t_max = {t_max}"
            )));
        }
        let steps = 512;
        for i in 0..=steps {
            let s = -s_half + 2.0 * s_half * i as f64 / steps as f64;
            if 1.0 - curve.kappa(s) * t_max <= MIN_JACOBIAN {
                return Err(Error::param(format!(
                    "Jacobian drops below {MIN_JACOBIAN} at s = {s}"
                )));
            }
        }
        if !injective_on_mesh(&curve, s_half, t_max) {
            return Err(Error::param("tubular map is not injective on the strip"));
        }
        Ok(TubularMap {
            chart: Chart::Curve(curve),
            s_half,
            t_max,
        })
    }

    /// Flat chart (`κ ≡ 0`, `τ₁ = t`) used as a separable test fixture.
    pub fn flat(s_half: f64, t_max: f64) -> Self {
        TubularMap {
            chart: Chart::Flat,
            s_half,
            t_max,
        }
    }

    pub fn curve(&self) -> Option<&BoundaryCurve> {
        match &self.chart {
            Chart::Curve(c) => Some(c),
            Chart::Flat => None,
        }
    }

    pub fn s_half(&self) -> f64 {
        self.s_half
    }

    pub fn t_max(&self) -> f64 {
        self.t_max
    }

    /// Half-width `δ` of the square strip `(−δ,δ)×(0,δ)` contained in the chart.
    pub fn delta(&self) -> f64 {
        self.s_half.min(self.t_max)
    }

    pub fn kappa0(&self) -> f64 {
        self.curve().map_or(0.0, BoundaryCurve::kappa0)
    }

    pub fn x0(&self) -> f64 {
        self.curve().map_or(0.0, BoundaryCurve::x0)
    }

    pub fn kappa(&self, s: f64) -> f64 {
        self.curve().map_or(0.0, |c| c.kappa(s))
    }

    pub fn contains(&self, s: f64, t: f64) -> bool {
        s.abs() < self.s_half && (0.0..self.t_max).contains(&t)
    }

    /// `τ(s,t)`, `τ₁(s,t)` and `m(s,t)`.
    pub fn eval(&self, s: f64, t: f64) -> Result<TubularPoint> {
        if !self.contains(s, t) {
            return Err(Error::Range(format!(
                "(s, t) = ({s}, {t}) outside the strip (−{0}, {0}) × [0, {1})",
                self.s_half, self.t_max
            )));
        }
        Ok(self.eval_unchecked(s, t))
    }

    pub(crate) fn eval_unchecked(&self, s: f64, t: f64) -> TubularPoint {
        match &self.chart {
            Chart::Curve(c) => {
                let cp = c.at(s);
                let point = [
                    cp.point[0] - t * cp.normal[0],
                    cp.point[1] - t * cp.normal[1],
                ];
                TubularPoint {
                    point,
                    tau1: point[0],
                    m: 1.0 - cp.kappa * t,
                }
            }
            Chart::Flat => TubularPoint {
                point: [t, s],
                tau1: t,
                m: 1.0,
            },
        }
    }

    /// `τ₁(s,t) − x₀ − t − (κ₀/2)s²`, the remainder of the second-order Taylor model.
    pub fn taylor_residual(&self, s: f64, t: f64) -> Result<f64> {
        let p = self.eval(s, t)?;
        Ok(p.tau1 - self.x0() - t - 0.5 * self.kappa0() * s * s)
    }
}

/// Every mesh point `τ(s,t)` must have its closest boundary point at distance `t`
/// (up to the boundary sampling error), and `m` must stay above the floor.
fn injective_on_mesh(curve: &BoundaryCurve, s_half: f64, t_max: f64) -> bool {
    let n_b = 4096;
    let boundary: Vec<[f64; 2]> = (0..n_b)
        .map(|i| curve.gamma(curve.length() * i as f64 / n_b as f64))
        .collect();
    let ds = curve.length() / n_b as f64;
    let slack = ds * ds + 1e-9;
    let (ns, nt) = (41, 12);
    for i in 0..ns {
        let s = -s_half + 2.0 * s_half * i as f64 / (ns - 1) as f64;
        let cp = curve.at(s);
        for j in 1..=nt {
            let t = t_max * j as f64 / nt as f64;
            if 1.0 - cp.kappa * t < MIN_JACOBIAN - 1e-12 {
                return false;
            }
            let p = [
                cp.point[0] - t * cp.normal[0],
                cp.point[1] - t * cp.normal[1],
            ];
            if curve.spec.level(p) >= 0.0 {
                return false;
            }
            let dist = boundary
                .iter()
                .map(|b| (b[0] - p[0]).hypot(b[1] - p[1]))
                .fold(f64::INFINITY, f64::min);
            if dist < t - slack {
                return false;
            }
        }
    }
    true
}

/// Closed-form check used in tests: curvature of a polar curve.
#[cfg(test)]
fn polar_curvature(r: f64, dr: f64, ddr: f64) -> f64 {
    (r * r + 2.0 * dr * dr - r * ddr) / (r * r + dr * dr).powf(1.5)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn disk_map() -> TubularMap {
        TubularMap::new(build_domain(&DomainSpec::unit_disk()).unwrap()).unwrap()
    }

    #[test]
    fn unit_disk_minimiser() {
        let c = build_domain(&DomainSpec::unit_disk()).unwrap();
        assert_abs_diff_eq!(c.x0_point()[0], 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(c.x0_point()[1], 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(c.kappa0(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(c.length(), TAU, epsilon = 1e-12);
        let g = c.gamma(0.0);
        assert_abs_diff_eq!(g[0], 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(c.theta(0.0), PI, epsilon = 1e-12);
    }

    #[test]
    fn ellipse_vertex_curvature() {
        let c = build_domain(&DomainSpec::ellipse(2.0, 1.0, [2.0, 0.0])).unwrap();
        assert_abs_diff_eq!(c.x0(), 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(c.kappa0(), 2.0, epsilon = 1e-10);
        // finite-difference curvature from the normal angle
        let e = 1e-5;
        let fd = (c.theta(e) - c.theta(-e)) / (2.0 * e);
        assert_abs_diff_eq!(fd, 2.0, epsilon = 1e-6);
    }

    #[test]
    fn shifted_domain_keeps_x0() {
        let c = build_domain(&DomainSpec::disk(0.5, [3.0, 1.0])).unwrap();
        assert_abs_diff_eq!(c.x0(), 2.5, epsilon = 1e-14);
        assert_abs_diff_eq!(c.kappa0(), 2.0, epsilon = 1e-10);
    }

    #[test]
    fn flat_or_degenerate_minimiser_is_rejected() {
        // r = 1 + c cos 2φ has zero curvature at φ = π for c = −1/5 ...
        let flat = DomainSpec::fourier_star(vec![1.0, 0.0, 0.0, -0.2, 0.0], [0.0, 0.0]);
        assert!(matches!(
            build_domain(&flat),
            Err(Error::DomainAssumption(_))
        ));
        // ... and two symmetric minimisers beyond that
        let twin = DomainSpec::fourier_star(vec![1.0, 0.0, 0.0, -0.3, 0.0], [0.0, 0.0]);
        assert!(matches!(
            build_domain(&twin),
            Err(Error::DomainAssumption(_))
        ));
    }

    #[test]
    fn star_curvature_matches_polar_formula() {
        let coeffs = vec![1.0, 0.1, 0.05, 0.08];
        let c = build_domain(&DomainSpec::fourier_star(coeffs.clone(), [0.0, 0.0])).unwrap();
        let (r, dr, ddr) = star_radius(&coeffs, c.phi0);
        assert_abs_diff_eq!(c.kappa0(), polar_curvature(r, dr, ddr), epsilon = 1e-10);
    }

    #[test]
    fn invalid_specs() {
        assert!(matches!(
            build_domain(&DomainSpec::disk(-1.0, [0.0, 0.0])),
            Err(Error::Parameter(_))
        ));
        assert!(matches!(
            build_domain(&DomainSpec::fourier_star(vec![0.2, 0.5], [0.0, 0.0])),
            Err(Error::Parameter(_))
        ));
    }

    #[test]
    fn tubular_disk_values() {
        let map = disk_map();
        let p = map.eval(0.0, 0.1).unwrap();
        assert_abs_diff_eq!(p.point[0], 0.1, epsilon = 1e-12);
        assert_abs_diff_eq!(p.point[1], 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(p.tau1, 0.1, epsilon = 1e-12);
        assert_abs_diff_eq!(p.m, 0.9, epsilon = 1e-12);
        let q = map.eval(0.2, 0.0).unwrap();
        assert_abs_diff_eq!(q.tau1, 0.0199334, epsilon = 1e-7);
        assert_abs_diff_eq!(q.tau1, 1.0 - 0.2f64.cos(), epsilon = 1e-13);
        assert!(matches!(map.eval(0.0, map.t_max()), Err(Error::Range(_))));
        assert!(matches!(map.eval(0.0, 2.0), Err(Error::Range(_))));
        assert_abs_diff_eq!(map.t_max(), 0.9, epsilon = 1e-9);
    }

    #[test]
    fn taylor_residual_values() {
        let map = disk_map();
        let r = map.taylor_residual(0.1, 0.0).unwrap();
        assert_abs_diff_eq!(r, 1.0 - 0.1f64.cos() - 0.005, epsilon = 1e-14);
        assert_abs_diff_eq!(r, -4.17e-6, epsilon = 1e-8);
        for &t in &[0.0, 0.1, 0.5] {
            assert_abs_diff_eq!(map.taylor_residual(0.0, t).unwrap(), 0.0, epsilon = 1e-13);
        }
    }

    #[test]
    fn taylor_remainder_ratio_bounded() {
        let map =
            TubularMap::new(build_domain(&DomainSpec::ellipse(2.0, 1.0, [2.0, 0.0])).unwrap())
                .unwrap();
        let mut sup: f64 = 0.0;
        for ray in 0..8 {
            let ang = 0.1 + 1.3 * ray as f64 / 7.0;
            for k in 1..12 {
                let r = 0.3 * 0.6f64.powi(k);
                let (s, t) = (r * ang.cos(), r * ang.sin());
                let res = map.taylor_residual(s, t).unwrap();
                sup = sup.max(res.abs() / (s.abs().powi(3) + (t * s * s).abs()));
            }
        }
        assert!(sup < 10.0, "ratio {sup}");
    }

    #[test]
    fn ellipse_strip() {
        let map =
            TubularMap::new(build_domain(&DomainSpec::ellipse(2.0, 1.0, [2.0, 0.0])).unwrap())
                .unwrap();
        assert_abs_diff_eq!(map.t_max(), 0.45, epsilon = 1e-9);
    }

    #[test]
    fn flat_chart() {
        let map = TubularMap::flat(3.0, 2.0);
        let p = map.eval(1.0, 0.5).unwrap();
        assert_eq!(p.tau1, 0.5);
        assert_eq!(p.m, 1.0);
        assert_eq!(map.kappa0(), 0.0);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn arc_length_is_unit_speed(s in -3.0f64..3.0) {
            let c = build_domain(&DomainSpec::ellipse(1.5, 1.0, [0.0, 0.0])).unwrap();
            let e = 1e-6;
            let a = c.gamma(s - e);
            let b = c.gamma(s + e);
            let speed = (b[0] - a[0]).hypot(b[1] - a[1]) / (2.0 * e);
            prop_assert!((speed - 1.0).abs() < 1e-8);
            let t = c.at(s).tangent;
            prop_assert!((t[0].hypot(t[1]) - 1.0).abs() < 1e-12);
        }

        #[test]
        fn curvature_is_normal_angle_derivative(s in -2.5f64..2.5) {
            let c = build_domain(&DomainSpec::fourier_star(vec![1.0, 0.1, 0.0, 0.05], [0.0, 0.0])).unwrap();
            let e = 1e-5;
            let fd = (c.theta(s + e) - c.theta(s - e)) / (2.0 * e);
            prop_assert!((fd - c.kappa(s)).abs() < 1e-6);
        }

        #[test]
        fn jacobian_positive_on_strip(s in -0.99f64..0.99, t in 0.0f64..0.99) {
            let map = disk_map();
            let (s, t) = (s * map.s_half(), t * map.t_max());
            prop_assert!(map.eval(s, t).unwrap().m > 0.0);
        }
    }
}

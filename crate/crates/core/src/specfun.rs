//! Airy function of the first kind, its zeros and the normalised
//! eigenstates of `-d²/dt² + t` on the half-line with a Dirichlet condition at 0.
//!
//! `Ai` is evaluated by its Maclaurin series in double-double arithmetic on
//! `|x| <= 8` and by the standard large-argument asymptotic expansions beyond.
//! Extended precision is what keeps the series usable on the oscillatory side,
//! where individual terms exceed the result by six orders of magnitude.

use std::f64::consts::{FRAC_PI_4, PI};
use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::quadrature::gauss_legendre_composite;

/// Boundary between the series and the asymptotic expansions.
const SERIES_LIMIT: f64 = 8.0;

/// `Ai(0)` as a double-double.
const AI0: Dd = Dd(0.3550280538878172, 2.05233632436212e-17);
/// `-Ai'(0)` as a double-double.
const AIP0: Dd = Dd(0.2588194037928068, -2.522243111610832e-17);

/// Step of the sign scan used to bracket zeros.
const SCAN_STEP: f64 = 0.1;
/// Final bracket width of the bisection.
const BISECTION_WIDTH: f64 = 1e-12;
/// Number of zeros held by the shared table.
pub const DEFAULT_ZERO_CAPACITY: usize = 1024;

/// Minimal double-double arithmetic (unevaluated sum of two `f64`).
#[derive(Clone, Copy, Debug)]
struct Dd(f64, f64);

impl Dd {
    fn from_f64(x: f64) -> Self {
        Dd(x, 0.0)
    }

    fn two_sum(a: f64, b: f64) -> (f64, f64) {
        let s = a + b;
        let bb = s - a;
        let err = (a - (s - bb)) + (b - bb);
        (s, err)
    }

    fn add(self, o: Dd) -> Dd {
        let (s, e) = Self::two_sum(self.0, o.0);
        let (t, f) = Self::two_sum(self.1, o.1);
        let (s, e) = Self::quick(s, e + t);
        let (s, e) = Self::quick(s, e + f);
        Dd(s, e)
    }

    fn quick(a: f64, b: f64) -> (f64, f64) {
        let s = a + b;
        (s, b - (s - a))
    }

    fn mul(self, o: Dd) -> Dd {
        let p = self.0 * o.0;
        let e = self.0.mul_add(o.0, -p);
        let e = e + (self.0 * o.1 + self.1 * o.0);
        let (p, e) = Self::quick(p, e);
        Dd(p, e)
    }

    fn mul_f64(self, b: f64) -> Dd {
        self.mul(Dd(b, 0.0))
    }

    fn div_f64(self, b: f64) -> Dd {
        let q1 = self.0 / b;
        let r = self.add(Dd::from_f64(b).mul_f64(-q1));
        let q2 = r.0 / b;
        let (s, e) = Self::quick(q1, q2);
        Dd(s, e)
    }

    fn neg(self) -> Dd {
        Dd(-self.0, -self.1)
    }

    fn value(self) -> f64 {
        self.0 + self.1
    }

    fn abs_hi(self) -> f64 {
        self.0.abs()
    }
}

fn airy_series(x: f64) -> f64 {
    let xd = Dd::from_f64(x);
    let x3 = xd.mul(xd).mul(xd);
    let mut f_term = Dd::from_f64(1.0);
    let mut g_term = xd;
    let mut f_sum = f_term;
    let mut g_sum = g_term;
    for k in 0..200 {
        let k = k as f64;
        f_term = f_term.mul(x3).div_f64((3.0 * k + 2.0) * (3.0 * k + 3.0));
        g_term = g_term.mul(x3).div_f64((3.0 * k + 3.0) * (3.0 * k + 4.0));
        f_sum = f_sum.add(f_term);
        g_sum = g_sum.add(g_term);
        let scale = f_sum.abs_hi().max(g_sum.abs_hi()).max(1.0);
        if f_term.abs_hi() < 1e-34 * scale && g_term.abs_hi() < 1e-34 * scale {
            break;
        }
    }
    AI0.mul(f_sum).add(AIP0.mul(g_sum).neg()).value()
}

/// Coefficients `u_k` of the asymptotic expansions (DLMF 9.7.2).
fn asymptotic_coefficients() -> &'static [f64] {
    static U: OnceLock<Vec<f64>> = OnceLock::new();
    U.get_or_init(|| {
        let mut u = vec![1.0];
        for k in 1..80usize {
            let kf = k as f64;
            let prev = u[k - 1];
            u.push(
                prev * (6.0 * kf - 5.0) * (6.0 * kf - 3.0) * (6.0 * kf - 1.0)
                    / ((2.0 * kf - 1.0) * 216.0 * kf),
            );
        }
        u
    })
}

/// Sums `Σ (sign)^k u_k / ζ^k` up to the smallest term, split into even and odd parts.
fn asymptotic_sums(zeta: f64) -> (f64, f64) {
    let u = asymptotic_coefficients();
    let mut even = 0.0;
    let mut odd = 0.0;
    let mut pow = 1.0;
    let mut last = f64::INFINITY;
    for (k, &uk) in u.iter().enumerate() {
        let term = uk * pow;
        if term.abs() > last {
            break;
        }
        last = term.abs();
        // (-1)^{floor(k/2)} pattern of the oscillatory expansion
        let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
        if k % 2 == 0 {
            even += sign * term;
        } else {
            odd += sign * term;
        }
        if term.abs() < 1e-17 * even.abs().max(1e-300) {
            break;
        }
        pow /= zeta;
    }
    (even, odd)
}

fn airy_negative_asymptotic(x: f64) -> f64 {
    let y = -x;
    let zeta = 2.0 / 3.0 * y * y.sqrt();
    let (p, q) = asymptotic_sums(zeta);
    let phase = zeta - FRAC_PI_4;
    (phase.cos() * p + phase.sin() * q) / (PI.sqrt() * y.powf(0.25))
}

fn airy_positive_asymptotic(x: f64) -> f64 {
    let zeta = 2.0 / 3.0 * x * x.sqrt();
    let u = asymptotic_coefficients();
    let mut sum = 0.0;
    let mut pow = 1.0;
    let mut last = f64::INFINITY;
    for (k, &uk) in u.iter().enumerate() {
        let term = uk * pow;
        if term.abs() > last {
            break;
        }
        last = term.abs();
        sum += if k % 2 == 0 { term } else { -term };
        if term < 1e-17 * sum.abs() {
            break;
        }
        pow /= zeta;
    }
    (-zeta).exp() * sum / (2.0 * PI.sqrt() * x.powf(0.25))
}

/// Airy function of the first kind.
pub fn airy_ai(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x.abs() <= SERIES_LIMIT {
        airy_series(x)
    } else if x > 0.0 {
        airy_positive_asymptotic(x)
    } else {
        airy_negative_asymptotic(x)
    }
}

/// Table of the first `capacity` values `z_k`, where `-z_k` are the zeros of `Ai`.
#[derive(Clone, Debug)]
pub struct AiryZeroTable {
    zeros: Vec<f64>,
    guaranteed_abs_error: f64,
}

impl AiryZeroTable {
    /// Sign scan of `Ai(-z)` with a fixed step, each bracket refined by bisection.
    pub fn compute(capacity: usize) -> Self {
        let mut zeros = Vec::with_capacity(capacity);
        let mut lo = 0.0_f64;
        let mut f_lo = airy_ai(-lo);
        let mut step = 0usize;
        while zeros.len() < capacity {
            step += 1;
            let hi = step as f64 * SCAN_STEP;
            let f_hi = airy_ai(-hi);
            if f_lo == 0.0 {
                zeros.push(lo);
            } else if f_lo * f_hi < 0.0 {
                zeros.push(bisect_zero(lo, hi, f_lo));
            }
            lo = hi;
            f_lo = f_hi;
        }
        zeros.truncate(capacity);
        AiryZeroTable {
            zeros,
            guaranteed_abs_error: BISECTION_WIDTH,
        }
    }

    /// Shared table with [`DEFAULT_ZERO_CAPACITY`] entries, computed on first use.
    pub fn shared() -> &'static AiryZeroTable {
        static TABLE: OnceLock<AiryZeroTable> = OnceLock::new();
        TABLE.get_or_init(|| AiryZeroTable::compute(DEFAULT_ZERO_CAPACITY))
    }

    pub fn zeros(&self) -> &[f64] {
        &self.zeros
    }

    pub fn capacity(&self) -> usize {
        self.zeros.len()
    }

    pub fn guaranteed_abs_error(&self) -> f64 {
        self.guaranteed_abs_error
    }

    /// `z_k` for `k >= 1`.
    pub fn get(&self, k: usize) -> Result<f64> {
        if k == 0 {
            return Err(Error::Range("Airy zero index starts at 1".into()));
        }
        self.zeros.get(k - 1).copied().ok_or(Error::Capacity {
            what: "Airy zero table",
            requested: k,
            capacity: self.zeros.len(),
        })
    }

    /// All `z_k` strictly below `bound`.
    pub fn below(&self, bound: f64) -> Result<&[f64]> {
        let n = self.zeros.partition_point(|&z| z < bound);
        if n == self.zeros.len() {
            return Err(Error::Capacity {
                what: "Airy zero table",
                requested: n + 1,
                capacity: self.zeros.len(),
            });
        }
        Ok(&self.zeros[..n])
    }
}

fn bisect_zero(mut lo: f64, mut hi: f64, mut f_lo: f64) -> f64 {
    while hi - lo > BISECTION_WIDTH {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let f_mid = airy_ai(-mid);
        if f_mid == 0.0 {
            return mid;
        }
        if f_lo * f_mid < 0.0 {
            hi = mid;
        } else {
            lo = mid;
            f_lo = f_mid;
        }
    }
    0.5 * (lo + hi)
}

/// `z_k`, the absolute value of the k-th zero of `Ai`.
pub fn airy_zero(k: usize) -> Result<f64> {
    AiryZeroTable::shared().get(k)
}

/// Leading-order asymptotic `¼ (3π)^{2/3} (4k − 1)^{2/3}` of `z_k`.
pub fn airy_zero_asymptotic(k: usize) -> f64 {
    0.25 * (3.0 * PI).powf(2.0 / 3.0) * (4.0 * k as f64 - 1.0).powf(2.0 / 3.0)
}

/// Unit-norm eigenfunction `a_k(t) = Ai(t − z_k) / ‖Ai(· − z_k)‖` of the
/// half-line Airy operator.
#[derive(Clone, Debug)]
pub struct NormalizedAiryState {
    k: usize,
    z_k: f64,
    inv_norm: f64,
    l2_norm_check: f64,
}

impl NormalizedAiryState {
    pub fn new(k: usize) -> Result<Self> {
        let z_k = airy_zero(k)?;
        let norm_sq = airy_mass(z_k, 0.0, f64::INFINITY);
        let inv_norm = 1.0 / norm_sq.sqrt();
        // independent panelling as a consistency check of the normalisation
        let check = gauss_legendre_composite(
            |t| (airy_ai(t - z_k) * inv_norm).powi(2),
            0.0,
            z_k + 24.0,
            (8.0 * (z_k + 24.0)) as usize + 16,
            12,
        );
        Ok(NormalizedAiryState {
            k,
            z_k,
            inv_norm,
            l2_norm_check: check,
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn z_k(&self) -> f64 {
        self.z_k
    }

    /// Quadrature value of `∫ a_k²`, expected to be 1.
    pub fn l2_norm_check(&self) -> f64 {
        self.l2_norm_check
    }

    pub fn eval(&self, t: f64) -> f64 {
        if t < 0.0 {
            return 0.0;
        }
        airy_ai(t - self.z_k) * self.inv_norm
    }
}

/// `∫_a^b Ai(t − z)² dt` for `0 <= a < b`, truncated where `Ai²` underflows.
fn airy_mass(z: f64, a: f64, b: f64) -> f64 {
    let b = b.min(z + 26.0);
    if b <= a {
        return 0.0;
    }
    let panels = ((b - a) * 6.0).ceil() as usize + 8;
    gauss_legendre_composite(|t| airy_ai(t - z).powi(2), a, b, panels, 10)
}

/// Samples of `a_k` on `grid`, normalised so that the trapezoidal `L²` norm over
/// the grid equals one.
pub fn airy_state_profile(k: usize, grid: &[f64]) -> Result<Vec<f64>> {
    let z_k = airy_zero(k)?;
    if grid.len() < 3 {
        return Err(Error::Resolution(
            "profile grid needs at least 3 points".into(),
        ));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) || grid[0] < 0.0 {
        return Err(Error::param(
            "profile grid must be increasing and inside [0, ∞)",
        ));
    }
    let last = *grid.last().unwrap();
    if last <= z_k {
        return Err(Error::param(format!(
            "profile grid ends at {last}, before the turning point z_{k} = {z_k}"
        )));
    }
    // local wavelength is at least 2π/√z_k on (0, z_k)
    let max_spacing = 2.0 * PI / z_k.sqrt() / 8.0;
    if let Some(w) = grid.windows(2).find(|w| w[1] - w[0] > max_spacing) {
        return Err(Error::Resolution(format!(
            "spacing {} exceeds {max_spacing} needed to resolve a_{k}",
            w[1] - w[0]
        )));
    }
    let raw: Vec<f64> = grid.iter().map(|&t| airy_ai(t - z_k)).collect();
    let norm_sq = trapezoid(grid, |i| raw[i] * raw[i]);
    let inv = 1.0 / norm_sq.sqrt();
    Ok(raw.into_iter().map(|v| v * inv).collect())
}

pub(crate) fn trapezoid(grid: &[f64], f: impl Fn(usize) -> f64) -> f64 {
    grid.windows(2)
        .enumerate()
        .map(|(i, w)| 0.5 * (w[1] - w[0]) * (f(i) + f(i + 1)))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    // reference values from an independent 40-digit evaluation
    const REFERENCE: &[(f64, f64)] = &[
        (-20.0, -0.17640612707798468959),
        (-15.0, 0.27821749087082892953),
        (-10.0, 0.040241238486443190689),
        (-8.5, -0.33029023763020887902),
        (-8.0, -0.052705050356386202622),
        (-7.9, 0.041701883617386709387),
        (-5.0, 0.35076100902411431979),
        (-1.0, 0.5355608832923521188),
        (0.0, 0.35502805388781723926),
        (0.5, 0.23169360648083348977),
        (1.0, 0.13529241631288141552),
        (2.5, 0.015725923380470489995),
        (5.0, 0.00010834442813607441735),
        (7.9, 6.2396400972839341797e-8),
        (8.0, 4.6922076160992316256e-8),
        (8.1, 3.5224356235735714843e-8),
        (10.0, 1.1047532552898685934e-10),
        (15.0, 2.164962520737992299e-18),
        (20.0, 1.6916728686705403136e-27),
    ];

    #[test]
    fn matches_reference_values() {
        for &(x, want) in REFERENCE {
            let got = airy_ai(x);
            assert!(
                (got - want).abs() <= 1e-12,
                "Ai({x}) = {got}, want {want}, diff {}",
                (got - want).abs()
            );
        }
    }

    #[test]
    fn value_at_origin_from_gamma() {
        let oracle = 3f64.powf(-2.0 / 3.0) / statrs::function::gamma::gamma(2.0 / 3.0);
        assert_abs_diff_eq!(airy_ai(0.0), oracle, epsilon = 1e-14);
        assert_abs_diff_eq!(airy_ai(0.0), 0.3550280539, epsilon = 1e-10);
    }

    #[test]
    fn near_first_zero_and_far_right() {
        assert!(airy_ai(-2.338107).abs() < 1e-6);
        let v = airy_ai(10.0);
        assert!(v > 0.0);
        assert_abs_diff_eq!(v, 1.1e-10, epsilon = 0.01e-10);
    }

    #[test]
    fn branches_agree_at_switch() {
        for &x in &[-8.0, -8.5, -9.0] {
            let (a, b) = (airy_series(x), airy_negative_asymptotic(x));
            assert!((a - b).abs() < 1e-12, "mismatch at {x}: {a} vs {b}");
        }
        for &x in &[8.0, 8.5] {
            let (a, b) = (airy_series(x), airy_positive_asymptotic(x));
            assert!(
                (a - b).abs() < 1e-12 * a.abs().max(1e-10),
                "mismatch at {x}: {a} vs {b}"
            );
        }
    }

    #[test]
    fn zeros_bracket_sign_changes() {
        let table = AiryZeroTable::shared();
        for &z in &table.zeros()[..50] {
            let eps = 1e-7;
            assert!(
                airy_ai(-z + eps) * airy_ai(-z - eps) < 0.0,
                "no sign change at {z}"
            );
        }
        assert!(table.zeros().windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn zero_values() {
        assert_abs_diff_eq!(airy_zero(1).unwrap(), 2.3381074104597670385, epsilon = 1e-9);
        assert_abs_diff_eq!(airy_zero(2).unwrap(), 4.0879494441309706166, epsilon = 1e-9);
        assert_abs_diff_eq!(airy_zero(5).unwrap(), 7.9441335871208531231, epsilon = 1e-9);
        assert_abs_diff_eq!(
            airy_zero(50).unwrap(),
            38.021008677255254433,
            epsilon = 1e-9
        );
        assert_abs_diff_eq!(
            airy_zero(100).unwrap(),
            60.455557274116698707,
            epsilon = 1e-9
        );
        assert!(matches!(airy_zero(0), Err(Error::Range(_))));
        assert!(matches!(
            airy_zero(DEFAULT_ZERO_CAPACITY + 1),
            Err(Error::Capacity { .. })
        ));
    }

    #[test]
    fn asymptotic_formula_values() {
        // the displayed formula evaluated in 30-digit arithmetic
        assert_abs_diff_eq!(airy_zero_asymptotic(1), 2.3202507947101019, epsilon = 1e-12);
        assert_abs_diff_eq!(airy_zero_asymptotic(5), 7.9424866632924979, epsilon = 1e-12);
        let r = airy_zero(20).unwrap() / airy_zero_asymptotic(20);
        assert!((r - 1.0).abs() < 5e-4);
    }

    #[test]
    fn asymptotic_relative_error_decreases() {
        let rel: Vec<f64> = (1..=50)
            .map(|k| {
                let z = airy_zero(k).unwrap();
                (z - airy_zero_asymptotic(k)).abs() / z
            })
            .collect();
        assert!(rel.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn normalised_state() {
        for k in 1..=4 {
            let a = NormalizedAiryState::new(k).unwrap();
            assert_abs_diff_eq!(a.l2_norm_check(), 1.0, epsilon = 1e-10);
            assert_abs_diff_eq!(a.eval(0.0), 0.0, epsilon = 1e-11);
        }
    }

    fn uniform(t_max: f64, n: usize) -> Vec<f64> {
        (0..=n).map(|i| t_max * i as f64 / n as f64).collect()
    }

    #[test]
    fn profile_normalisation_and_orthogonality() {
        let grid = uniform(30.0, 30_000);
        let a1 = airy_state_profile(1, &grid).unwrap();
        let a2 = airy_state_profile(2, &grid).unwrap();
        assert_abs_diff_eq!(trapezoid(&grid, |i| a1[i] * a1[i]), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(a1[0], 0.0, epsilon = 1e-11);
        assert_abs_diff_eq!(trapezoid(&grid, |i| a1[i] * a2[i]), 0.0, epsilon = 1e-8);
    }

    #[test]
    fn profile_rejects_bad_grids() {
        assert!(matches!(
            airy_state_profile(1, &uniform(30.0, 20)),
            Err(Error::Resolution(_))
        ));
        assert!(matches!(
            airy_state_profile(3, &uniform(4.0, 4000)),
            Err(Error::Parameter(_))
        ));
    }

    #[test]
    fn profile_satisfies_eigen_relation_at_second_order() {
        // discrete residual of -a'' + t a - z a shrinks ~4x per halving
        let residual = |n: usize, k: usize| {
            let grid = uniform(25.0, n);
            let a = airy_state_profile(k, &grid).unwrap();
            let z = airy_zero(k).unwrap();
            let dt = grid[1] - grid[0];
            (1..n)
                .map(|i| {
                    let lap = (a[i - 1] - 2.0 * a[i] + a[i + 1]) / (dt * dt);
                    (-lap + (grid[i] - z) * a[i]).powi(2) * dt
                })
                .sum::<f64>()
                .sqrt()
        };
        for k in 1..=10 {
            let r1 = residual(2000, k);
            let r2 = residual(4000, k);
            let order = (r1 / r2).log2();
            assert!((order - 2.0).abs() < 0.1, "k = {k}: order {order}");
        }
    }
}

//! Convergence studies: sweeps over `h` comparing solver output with the
//! semiclassical limits, plus log-log rate fitting.

mod setup;
mod studies;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::DomainSpec;
use crate::operators::{Regime, TestPotential};
use crate::predictions::LimitParams;

pub use setup::{study_operator, SolverSettings};
pub use studies::{
    perturbation_shift_series, run_bracketing_check, run_counting_study, run_density_study,
    run_expansion_study, run_perturbed_study, summarize_expansion, BracketRecord,
};

/// Which comparison a study performs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StudyKind {
    Expansion,
    Counting,
    Density,
    Bracketing,
    Perturbed,
}

impl StudyKind {
    pub fn label(&self) -> &'static str {
        match self {
            StudyKind::Expansion => "expansion",
            StudyKind::Counting => "counting",
            StudyKind::Density => "density",
            StudyKind::Bracketing => "bracketing",
            StudyKind::Perturbed => "perturbed",
        }
    }
}

/// Threshold regime tag; the second regime takes `α` from the limit parameters.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegimeKind {
    #[default]
    First,
    Second,
}

/// Discretisation used for the spectral computations.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OperatorMode {
    /// Tubular window around the minimum point of `x₁` on the boundary.
    #[default]
    Window,
    /// Cartesian grid of the whole domain, truncated above the threshold.
    Full,
}

fn default_tolerance() -> f64 {
    0.15
}

fn default_min_rate() -> f64 {
    1.25
}

fn default_k_max() -> usize {
    3
}

fn default_workers() -> usize {
    1
}

/// A complete, serialisable description of one study.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudyConfig {
    pub name: String,
    pub kind: StudyKind,
    pub domain: DomainSpec,
    /// Strictly decreasing semiclassical parameters.
    pub h_list: Vec<f64>,
    #[serde(default)]
    pub params: LimitParams,
    #[serde(default)]
    pub regime: RegimeKind,
    #[serde(default)]
    pub potential: Option<TestPotential>,
    #[serde(default)]
    pub mode: OperatorMode,
    /// Expansion studies compare eigenvalues `k = 1..=k_max`.
    #[serde(default = "default_k_max")]
    pub k_max: usize,
    /// Bracketing checks run at each of these `μ` (defaults to `params.mu`).
    #[serde(default)]
    pub mu_list: Vec<f64>,
    /// Relative deviation allowed at the smallest `h`.
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    /// Smallest acceptable fitted rate in expansion studies.
    #[serde(default = "default_min_rate")]
    pub min_rate: f64,
    #[serde(default)]
    pub solver: SolverSettings,
    #[serde(default = "default_workers")]
    pub workers: usize,
    #[serde(default)]
    pub output: Option<String>,
}

impl StudyConfig {
    pub fn new(
        name: impl Into<String>,
        kind: StudyKind,
        domain: DomainSpec,
        h_list: Vec<f64>,
    ) -> Self {
        StudyConfig {
            name: name.into(),
            kind,
            domain,
            h_list,
            params: LimitParams::default(),
            regime: RegimeKind::First,
            potential: None,
            mode: OperatorMode::Window,
            k_max: default_k_max(),
            mu_list: Vec::new(),
            tolerance: default_tolerance(),
            min_rate: default_min_rate(),
            solver: SolverSettings::default(),
            workers: default_workers(),
            output: None,
        }
    }

    pub fn regime(&self) -> Regime {
        match self.regime {
            RegimeKind::First => Regime::First,
            RegimeKind::Second => Regime::Second {
                alpha: self.params.alpha,
            },
        }
    }

    /// Every violated constraint, one message each.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.name.trim().is_empty() {
            out.push("name must not be empty".to_string());
        }
        if let Err(e) = self.domain.validate() {
            out.push(format!("domain: {e}"));
        }
        if self.h_list.is_empty() {
            out.push("h_list must not be empty".to_string());
        }
        if self.h_list.iter().any(|&h| !(h > 0.0 && h < 1.0)) {
            out.push("h_list entries must lie in (0, 1)".to_string());
        }
        if self.h_list.windows(2).any(|w| w[1] >= w[0]) {
            out.push("h_list must be strictly decreasing".to_string());
        }
        if let Some(Err(e)) = self.potential.as_ref().map(TestPotential::validate) {
            out.push(format!("potential: {e}"));
        }
        if let Err(e) = self.params.validate() {
            out.push(format!("params: {e}"));
        }
        if let Err(e) = self.regime().validate() {
            out.push(format!("regime: {e}"));
        }
        if !(self.tolerance > 0.0) {
            out.push("tolerance must be positive".to_string());
        }
        if self.workers == 0 {
            out.push("workers must be at least 1".to_string());
        }
        out.extend(self.solver.violations());
        match self.kind {
            StudyKind::Expansion if self.k_max == 0 => {
                out.push("k_max must be at least 1".to_string())
            }
            StudyKind::Expansion if self.h_list.len() < 3 => out
                .push("expansion studies need at least 3 values of h for the rate fit".to_string()),
            StudyKind::Density | StudyKind::Perturbed if self.potential.is_none() => {
                out.push(format!("{} studies need a potential", self.kind.label()))
            }
            StudyKind::Density if self.mode == OperatorMode::Full => {
                out.push("density pairings are computed on the window chart only".to_string())
            }
            StudyKind::Perturbed if self.mode == OperatorMode::Full => {
                out.push("perturbed studies run on the window operator only".to_string())
            }
            _ => {}
        }
        if self.mu_list.iter().any(|&m| !(m >= 0.0)) {
            out.push("mu_list entries must be non-negative".to_string());
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(v.join("; ")))
        }
    }
}

/// Pass or fail against the declared tolerance.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
}

impl Verdict {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
        }
    }
}

/// One `(h, series)` observation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    /// Series within the study, e.g. `k=2` or `gamma=0`.
    pub series: String,
    pub h: f64,
    pub observed: f64,
    pub normalized: f64,
    pub predicted: f64,
    /// Relative deviation `|normalized − predicted| / |predicted|`, absolute when the prediction is 0.
    pub deviation: f64,
    /// `[N(Λ−tol), N(Λ), N(Λ+tol)]` for counting rows.
    pub bracket: Option<[usize; 3]>,
    /// Operator used for the row.
    pub operator: String,
}

/// Fitted log-log rate of one series.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeriesRate {
    pub series: String,
    pub rate: Option<f64>,
}

/// Result of a study; rows are ordered by series, then by decreasing `h`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub study: String,
    pub kind: StudyKind,
    pub rows: Vec<ReportRow>,
    pub rates: Vec<SeriesRate>,
    /// Rate of the first series.
    pub fitted_rate: Option<f64>,
    pub tolerance: f64,
    pub verdict: Verdict,
    pub reason: String,
    pub notes: Vec<String>,
}

impl ConvergenceReport {
    pub fn rate_of(&self, series: &str) -> Option<f64> {
        self.rates
            .iter()
            .find(|r| r.series == series)
            .and_then(|r| r.rate)
    }

    pub fn series(&self, series: &str) -> Vec<&ReportRow> {
        self.rows.iter().filter(|r| r.series == series).collect()
    }
}

fn deviation(normalized: f64, predicted: f64) -> f64 {
    if predicted == 0.0 {
        normalized.abs()
    } else {
        ((normalized - predicted) / predicted).abs()
    }
}

/// Least-squares slope of `log r` against `log h`. Nonpositive residuals are
/// dropped with a warning; fewer than three usable points is an error.
pub fn fit_rate(pairs: &[(f64, f64)]) -> Result<f64> {
    let usable: Vec<(f64, f64)> = pairs
        .iter()
        .filter(|&&(h, r)| {
            let ok = h > 0.0 && r > 0.0 && r.is_finite();
            if !ok {
                log::warn!("fit_rate: dropping point (h = {h}, residual = {r})");
            }
            ok
        })
        .map(|&(h, r)| (h.ln(), r.ln()))
        .collect();
    if usable.len() < 3 {
        return Err(Error::Fit(format!(
            "need at least 3 positive residuals, have {}",
            usable.len()
        )));
    }
    let n = usable.len() as f64;
    let mx = usable.iter().map(|p| p.0).sum::<f64>() / n;
    let my = usable.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = usable.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Fit("all h values coincide".into()));
    }
    let sxy: f64 = usable.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    Ok(sxy / sxx)
}

/// Runs the study described by `cfg`.
pub fn run_study(cfg: &StudyConfig) -> Result<ConvergenceReport> {
    match cfg.kind {
        StudyKind::Expansion => run_expansion_study(cfg),
        StudyKind::Counting => run_counting_study(cfg),
        StudyKind::Density => run_density_study(cfg),
        StudyKind::Bracketing => run_bracketing_check(cfg).map(|(report, _)| report),
        StudyKind::Perturbed => run_perturbed_study(cfg),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};

    #[test]
    fn exact_power_laws() {
        let hs: [f64; 4] = [0.1, 0.05, 0.025, 0.0125];
        let a: Vec<(f64, f64)> = hs.iter().map(|&h| (h, 3.0 * h.powf(4.0 / 3.0))).collect();
        assert_abs_diff_eq!(fit_rate(&a).unwrap(), 4.0 / 3.0, epsilon = 1e-12);
        let b: Vec<(f64, f64)> = hs.iter().map(|&h| (h, h * h)).collect();
        assert_abs_diff_eq!(fit_rate(&b).unwrap(), 2.0, epsilon = 1e-12);
    }

    #[test]
    fn noisy_power_law() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let pts: Vec<(f64, f64)> = (0..5)
            .map(|i| {
                let h = 0.1 * 0.5f64.powi(i);
                (h, h.powf(1.5) * (1.0 + rng.random_range(-0.05..0.05)))
            })
            .collect();
        assert!((fit_rate(&pts).unwrap() - 1.5).abs() < 0.1);
    }

    #[test]
    fn fit_needs_three_points() {
        assert!(matches!(
            fit_rate(&[(0.1, 1.0), (0.05, 0.0), (0.02, -1.0), (0.01, 0.5)]),
            Err(Error::Fit(_))
        ));
    }

    #[test]
    fn config_violations_are_enumerated() {
        let mut cfg = StudyConfig::new(
            "x",
            StudyKind::Expansion,
            DomainSpec::unit_disk(),
            vec![0.02, 0.04, 0.08],
        );
        cfg.tolerance = -1.0;
        let v = cfg.violations();
        assert!(v.iter().any(|m| m.contains("decreasing")));
        assert!(v.iter().any(|m| m.contains("tolerance")));
        cfg.h_list = vec![0.08, 0.04, 0.02];
        cfg.tolerance = 0.1;
        assert!(cfg.validate().is_ok());
        cfg.regime = RegimeKind::Second;
        cfg.params.alpha = 0.5;
        assert!(matches!(cfg.validate(), Err(Error::Config(_))));
    }
}

use std::fs;
use std::path::{Path, PathBuf};

use serde_json::json;
use stark_core::predictions::{counting_limit_first, counting_limit_second};
use stark_core::{
    count_below, eigs_below, run_bracketing_check, run_study, study_operator, BracketRecord,
    ConvergenceReport, Error, Regime, StudyConfig, StudyKind, Verdict,
};

use crate::args::{RunArgs, SingleArgs};
use crate::output::{
    csv_text, tool, Outcome, OutputWriter, Provenance, RunManifest, StepFailure, CSV_SCHEMA,
    MANIFEST_SCHEMA,
};
use crate::predict::sig6;
use crate::{exit_code, status, Failure};

/// Parses a TOML study configuration and lists every schema violation.
pub fn load_config(path: &Path) -> Result<StudyConfig, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::usage(format!("cannot read {}: {e}", path.display())))?;
    let cfg: StudyConfig =
        toml::from_str(&text).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
    check(&cfg, path)?;
    Ok(cfg)
}

fn check(cfg: &StudyConfig, path: &Path) -> Result<(), Failure> {
    let v = cfg.violations();
    if v.is_empty() {
        return Ok(());
    }
    let mut msg = format!("{} violates the config schema:", path.display());
    for item in v {
        msg.push_str("\n  - ");
        msg.push_str(&item);
    }
    Err(Failure::usage(msg))
}

fn with_overrides(
    mut cfg: StudyConfig,
    workers: Option<usize>,
    tol: Option<f64>,
    path: &Path,
) -> Result<StudyConfig, Failure> {
    if let Some(w) = workers {
        cfg.workers = w;
    }
    if let Some(t) = tol {
        cfg.solver.tol = t;
    }
    check(&cfg, path)?;
    Ok(cfg)
}

/// Runs `job`, dropping each `h` whose solve fails and recording it, until the rest succeed.
fn resilient<T>(
    cfg: &StudyConfig,
    job: impl Fn(&StudyConfig) -> stark_core::Result<T>,
) -> Result<(Option<T>, Vec<StepFailure>), Failure> {
    let mut cfg = cfg.clone();
    let mut failures = Vec::new();
    loop {
        match job(&cfg) {
            Ok(t) => return Ok((Some(t), failures)),
            Err(Error::AtStep { h, source }) if exit_code(&source) == status::SOLVER => {
                log::warn!("step h = {h} failed: {source}");
                failures.push(StepFailure {
                    h,
                    error: source.to_string(),
                });
                cfg.h_list.retain(|&x| x != h);
                if !cfg.violations().is_empty() {
                    return Ok((None, failures));
                }
            }
            Err(e) => return Err(e.into()),
        }
    }
}

fn file_stem(name: &str) -> String {
    name.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' || c == '_' || c == '.' {
                c
            } else {
                '_'
            }
        })
        .collect()
}

fn out_dir(a: &RunArgs, cfg: &StudyConfig) -> PathBuf {
    a.out
        .clone()
        .or_else(|| cfg.output.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."))
}

struct RunRecord {
    command: &'static str,
    started: String,
    report: Option<ConvergenceReport>,
    failures: Vec<StepFailure>,
    brackets: Option<Vec<BracketRecord>>,
    /// Overrides the report's verdict (bracketing violations).
    violation: Option<String>,
}

fn persist(a: &RunArgs, cfg: &StudyConfig, rec: &RunRecord) -> Result<(PathBuf, PathBuf), Failure> {
    let mut writer = OutputWriter::new(out_dir(a, cfg))?;
    let stem = file_stem(&cfg.name);
    let csv = csv_text(&cfg.name, rec.report.as_ref(), &rec.failures)?;
    let csv_path = writer.write(&format!("{stem}.csv"), &csv)?;
    let (verdict, reason) = match (&rec.report, &rec.violation) {
        (_, Some(v)) => ("fail".to_string(), v.clone()),
        (_, None) if !rec.failures.is_empty() => (
            "error".to_string(),
            format!("{} step(s) failed in the solver", rec.failures.len()),
        ),
        (Some(r), None) => (r.verdict.label().to_string(), r.reason.clone()),
        (None, None) => ("error".to_string(), "no result".to_string()),
    };
    let manifest = RunManifest {
        schema: MANIFEST_SCHEMA.to_string(),
        csv_schema: CSV_SCHEMA.to_string(),
        tool: tool(),
        command: rec.command.to_string(),
        started: rec.started.clone(),
        finished: chrono::Utc::now().to_rfc3339(),
        config: cfg.clone(),
        outcome: Outcome {
            verdict,
            reason,
            fitted_rate: rec.report.as_ref().and_then(|r| r.fitted_rate),
            rates: rec
                .report
                .as_ref()
                .map(|r| r.rates.clone())
                .unwrap_or_default(),
            notes: rec
                .report
                .as_ref()
                .map(|r| r.notes.clone())
                .unwrap_or_default(),
        },
        rows: rec
            .report
            .iter()
            .flat_map(|r| &r.rows)
            .map(|row| Provenance {
                series: row.series.clone(),
                h: row.h,
                operator: row.operator.clone(),
            })
            .collect(),
        failures: rec.failures.clone(),
        brackets: rec.brackets.clone(),
        outputs: writer.outputs(),
    };
    let text = serde_json::to_string_pretty(&manifest).map_err(|e| Failure {
        code: status::SOLVER,
        message: format!("manifest encoding failed: {e}"),
    })?;
    let manifest_path = writer.write(&format!("{stem}.manifest.json"), text.as_bytes())?;
    Ok((csv_path, manifest_path))
}

fn report_status(rec: &RunRecord) -> u8 {
    if !rec.failures.is_empty() || rec.report.is_none() {
        status::SOLVER
    } else if rec.violation.is_some() {
        status::VERDICT_FAIL
    } else {
        match rec.report.as_ref().map(|r| r.verdict) {
            Some(Verdict::Pass) => status::PASS,
            _ => status::VERDICT_FAIL,
        }
    }
}

fn print_run(rec: &RunRecord, paths: &(PathBuf, PathBuf), machine: bool) {
    if machine {
        println!(
            "{}",
            json!({
                "report": rec.report,
                "failures": rec.failures,
                "brackets": rec.brackets,
                "violation": rec.violation,
                "csv": paths.0,
                "manifest": paths.1,
            })
        );
        return;
    }
    if let Some(r) = &rec.report {
        println!("{} ({})", r.study, r.kind.label());
        println!(
            "{:<20} {:>10} {:>14} {:>14} {:>10}",
            "series", "h", "normalized", "predicted", "deviation"
        );
        for row in &r.rows {
            println!(
                "{:<20} {:>10} {:>14} {:>14} {:>10}",
                row.series,
                row.h,
                sig6(row.normalized),
                sig6(row.predicted),
                sig6(row.deviation)
            );
        }
        for s in &r.rates {
            if let Some(rate) = s.rate {
                println!("rate {}: {}", s.series, sig6(rate));
            }
        }
        for n in &r.notes {
            println!("note: {n}");
        }
        println!("verdict: {} ({})", r.verdict.label(), r.reason);
    }
    for f in &rec.failures {
        println!("failed step h = {}: {}", f.h, f.error);
    }
    if let Some(v) = &rec.violation {
        println!("verdict: fail ({v})");
    }
    println!("wrote {} and {}", paths.0.display(), paths.1.display());
}

pub fn study(a: &RunArgs, machine: bool) -> Result<u8, Failure> {
    let cfg = with_overrides(load_config(&a.config)?, a.workers, a.tol, &a.config)?;
    let started = chrono::Utc::now().to_rfc3339();
    let (report, failures) = resilient(&cfg, run_study)?;
    let rec = RunRecord {
        command: "study",
        started,
        report,
        failures,
        brackets: None,
        violation: None,
    };
    let paths = persist(a, &cfg, &rec)?;
    print_run(&rec, &paths, machine);
    Ok(report_status(&rec))
}

pub fn bracket_check(a: &RunArgs, machine: bool) -> Result<u8, Failure> {
    let mut cfg = with_overrides(load_config(&a.config)?, a.workers, a.tol, &a.config)?;
    cfg.kind = StudyKind::Bracketing;
    let started = chrono::Utc::now().to_rfc3339();
    // a violated sandwich is a verdict, not a solver failure
    let job = |c: &StudyConfig| match run_bracketing_check(c) {
        Ok(ok) => Ok(Ok(ok)),
        Err(Error::AtStep { source, .. }) if matches!(*source, Error::Integrity(_)) => {
            Ok(Err(source.to_string()))
        }
        Err(e) => Err(e),
    };
    let (outcome, failures) = resilient(&cfg, job)?;
    let (report, brackets, violation) = match outcome {
        Some(Ok((r, b))) => (Some(r), Some(b), None),
        Some(Err(v)) => (None, None, Some(v)),
        None => (None, None, None),
    };
    let rec = RunRecord {
        command: "bracket-check",
        started,
        report,
        failures,
        brackets,
        violation,
    };
    let paths = persist(a, &cfg, &rec)?;
    print_run(&rec, &paths, machine);
    Ok(if rec.violation.is_some() && rec.failures.is_empty() {
        status::VERDICT_FAIL
    } else {
        report_status(&rec)
    })
}

fn single_h(a: &SingleArgs) -> Result<(StudyConfig, f64), Failure> {
    let cfg = with_overrides(load_config(&a.config)?, None, a.tol, &a.config)?;
    let h = match a.h {
        Some(h) if h > 0.0 && h < 1.0 => h,
        Some(h) => return Err(Failure::usage(format!("--h must lie in (0, 1), got {h}"))),
        None => *cfg
            .h_list
            .last()
            .ok_or_else(|| Failure::usage("h_list is empty"))?,
    };
    Ok((cfg, h))
}

pub fn solve(a: &SingleArgs, machine: bool) -> Result<u8, Failure> {
    let (cfg, h) = single_h(a)?;
    let (op, lambda) = study_operator(&cfg, h)?;
    let spec = eigs_below(&op, lambda, cfg.solver.eigen_options(false))?;
    let scale = h.powf(2.0 / 3.0);
    let rescaled: Vec<f64> = spec
        .eigenvalues
        .iter()
        .map(|l| (l - cfg.params.x0) / scale)
        .collect();
    if machine {
        println!(
            "{}",
            json!({
                "h": h,
                "threshold": lambda,
                "operator": op.description(),
                "unknowns": op.matrix().n(),
                "eigenvalues": spec.eigenvalues,
                "rescaled": rescaled,
                "residual_bound": spec.residual_bound,
            })
        );
    } else {
        println!("operator: {}", op.description());
        println!(
            "threshold = {} ({} eigenvalues below)",
            sig6(lambda),
            spec.len()
        );
        println!("{:>4} {:>22} {:>12}", "k", "eigenvalue", "(λ−x₀)/h^(2/3)");
        for (k, (l, r)) in spec.eigenvalues.iter().zip(&rescaled).enumerate() {
            println!("{:>4} {:>22.15} {:>12}", k + 1, l, sig6(*r));
        }
        println!("residual bound: {:.2e}", spec.residual_bound);
    }
    Ok(status::PASS)
}

pub fn count(a: &SingleArgs, machine: bool) -> Result<u8, Failure> {
    let (cfg, h) = single_h(a)?;
    let (op, lambda) = study_operator(&cfg, h)?;
    let c = count_below(&op, lambda, cfg.solver.bracket_tol)?;
    let regime = cfg.regime();
    let counting = stark_core::LimitParams {
        gamma: 0.0,
        ..cfg.params
    };
    let limit = match regime {
        Regime::First => counting_limit_first(&counting)?,
        Regime::Second { .. } => counting_limit_second(&counting)?,
    };
    let normalized = counting.normalization(regime, h) * c.count as f64;
    if machine {
        println!(
            "{}",
            json!({
                "h": h,
                "threshold": lambda,
                "operator": op.description(),
                "count": c.count,
                "bracket": [c.lower, c.upper],
                "normalized": normalized,
                "limit": limit,
            })
        );
    } else {
        println!("operator: {}", op.description());
        println!("threshold = {}", sig6(lambda));
        println!("count = {} (bracket [{}, {}])", c.count, c.lower, c.upper);
        println!("normalized = {} vs limit {}", sig6(normalized), sig6(limit));
    }
    Ok(status::PASS)
}

pub fn density(a: &SingleArgs, machine: bool) -> Result<u8, Failure> {
    let (mut cfg, h) = single_h(a)?;
    if cfg.potential.is_none() {
        return Err(Failure::usage(
            "density needs a [potential] table in the config",
        ));
    }
    cfg.kind = StudyKind::Density;
    cfg.h_list = vec![h];
    check(&cfg, &a.config)?;
    let r = run_study(&cfg)?;
    let row = &r.rows[0];
    if machine {
        println!(
            "{}",
            json!({
                "h": h,
                "operator": row.operator,
                "raw": row.observed,
                "normalized": row.normalized,
                "predicted": row.predicted,
                "deviation": row.deviation,
            })
        );
    } else {
        println!("operator: {}", row.operator);
        println!("pairing ∫V_h ρ = {}", sig6(row.observed));
        println!(
            "normalized = {} vs limit {} (relative deviation {})",
            sig6(row.normalized),
            sig6(row.predicted),
            sig6(row.deviation)
        );
    }
    Ok(status::PASS)
}

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use sha2::{Digest, Sha256};
use stark_core::StudyConfig;

fn stark(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_stark"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

const SMALL_COUNTING: &str = r#"
name = "small-count"
kind = "counting"
h_list = [0.08, 0.06, 0.05]

[domain]
kind = "disk"
radius = 1.0
center = [1.0, 0.0]

[params]
gamma = 1.0
mu = 4.0
kappa0 = 1.0
"#;

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

#[test]
fn predict_values() {
    let o = stark(&[
        "predict",
        "counting-first",
        "--gamma",
        "0",
        "--mu",
        "4",
        "--kappa0",
        "1",
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("1.17514"), "{}", stdout(&o));

    let o = stark(&["predict", "constant", "--gamma", "0", "--d", "2"]);
    assert!(stdout(&o).contains("0.0795775"), "{}", stdout(&o));

    let o = stark(&["predict", "counting-second", "--alpha", "0.5"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("(2/3, 1)"), "{}", stderr(&o));
}

#[test]
fn predict_machine_readable() {
    let o = stark(&["--machine-readable", "predict", "rough-weyl", "--mu", "50"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!((v["value"].as_f64().unwrap() - 1061.03).abs() < 0.01);
    assert!(v["relative_remainder_scale"].as_f64().is_some());

    let o = stark(&[
        "--machine-readable",
        "predict",
        "weyl",
        "--d",
        "1",
        "--lambda",
        "4",
    ]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!((v["value"].as_f64().unwrap() - 2.0 / std::f64::consts::PI).abs() < 1e-6);
}

#[test]
fn predict_needs_potential_for_shift() {
    let o = stark(&["predict", "shift"]);
    assert_eq!(o.status.code(), Some(2));
    let o = stark(&["predict", "shift", "--potential", "box:2,-1,1,0,40"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("shift = 2.00000"), "{}", stdout(&o));
}

#[test]
fn bundled_configs_are_valid() {
    let mut seen = 0;
    for entry in fs::read_dir(configs()).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "toml") {
            let cfg: StudyConfig = toml::from_str(&fs::read_to_string(&path).unwrap())
                .unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            assert!(
                cfg.violations().is_empty(),
                "{}: {:?}",
                path.display(),
                cfg.violations()
            );
            seen += 1;
        }
    }
    assert!(seen >= 6);
}

#[test]
fn bundled_expansion_study_passes_and_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = configs().join("disk-expansion.toml");
    let o = stark(&[
        "study",
        "--config",
        cfg_path.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}{}", stdout(&o), stderr(&o));

    let csv = fs::read(dir.path().join("disk-expansion.csv")).unwrap();
    let text = String::from_utf8(csv.clone()).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "study,h,observed,normalized,predicted,deviation,rate,verdict"
    );
    assert!(lines.clone().count() >= 3);
    assert!(lines.all(|l| l.ends_with(",pass")));

    let manifest: serde_json::Value =
        serde_json::from_slice(&fs::read(dir.path().join("disk-expansion.manifest.json")).unwrap())
            .unwrap();
    let original: StudyConfig = toml::from_str(&fs::read_to_string(&cfg_path).unwrap()).unwrap();
    let restored: StudyConfig = serde_json::from_value(manifest["config"].clone()).unwrap();
    assert_eq!(restored, original);
    assert_eq!(
        manifest["outputs"][0]["sha256"],
        hex::encode(Sha256::digest(&csv))
    );
    assert_eq!(manifest["outcome"]["verdict"], "pass");
    assert_eq!(manifest["rows"].as_array().unwrap().len(), 9);
    assert!(
        manifest["started"].as_str().is_some() && manifest["tool"]["version"].as_str().is_some()
    );
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.toml", SMALL_COUNTING);
    let mut csvs = Vec::new();
    for run in ["a", "b"] {
        let out = dir.path().join(run);
        let o = stark(&[
            "study",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ]);
        assert!(matches!(o.status.code(), Some(0 | 1)), "{}", stderr(&o));
        csvs.push(fs::read(out.join("small-count.csv")).unwrap());
    }
    assert_eq!(csvs[0], csvs[1]);
}

#[test]
fn schema_errors_are_enumerated() {
    let dir = tempfile::tempdir().unwrap();
    let bad = SMALL_COUNTING
        .replace("h_list = [0.08, 0.06, 0.05]", "h_list = [0.05, 0.06, 0.08]")
        .replace("name = \"small-count\"", "name = \"\"");
    let cfg = write_config(dir.path(), "bad.toml", &bad);
    let o = stark(&[
        "study",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.contains("strictly decreasing"), "{err}");
    assert!(err.contains("name must not be empty"), "{err}");

    let unknown = write_config(
        dir.path(),
        "unknown.toml",
        &format!("{SMALL_COUNTING}\nbogus = 1\n"),
    );
    let o = stark(&["study", "--config", unknown.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));

    let o = stark(&[
        "study",
        "--config",
        dir.path().join("missing.toml").to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn failed_verdict_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let strict = format!("tolerance = 1e-6\n{SMALL_COUNTING}");
    let cfg = write_config(dir.path(), "strict.toml", &strict);
    let o = stark(&[
        "study",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1), "{}", stdout(&o));
    let csv = fs::read_to_string(dir.path().join("small-count.csv")).unwrap();
    assert!(csv.lines().skip(1).all(|l| l.ends_with(",fail")));
}

#[test]
fn solver_failures_are_recorded_per_row() {
    let dir = tempfile::tempdir().unwrap();
    // the smallest h needs more unknowns than allowed; the other two still run
    let capped = format!("{SMALL_COUNTING}\n[solver]\nmax_unknowns = 30000\n");
    let cfg = write_config(dir.path(), "capped.toml", &capped);
    let o = stark(&[
        "study",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(3), "{}{}", stdout(&o), stderr(&o));
    let csv = fs::read_to_string(dir.path().join("small-count.csv")).unwrap();
    assert!(csv.lines().any(|l| l.ends_with(",error")), "{csv}");
    let manifest: serde_json::Value =
        serde_json::from_slice(&fs::read(dir.path().join("small-count.manifest.json")).unwrap())
            .unwrap();
    assert_eq!(manifest["outcome"]["verdict"], "error");
    assert!(!manifest["failures"].as_array().unwrap().is_empty());
}

#[test]
fn single_solve_and_count() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.toml", SMALL_COUNTING);
    let o = stark(&[
        "--machine-readable",
        "solve",
        "--config",
        cfg.to_str().unwrap(),
        "--h",
        "0.08",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let eig = v["eigenvalues"].as_array().unwrap();
    assert_eq!(eig.len(), 2);
    assert!((eig[0].as_f64().unwrap() - 0.49957).abs() < 1e-4);

    let o = stark(&[
        "--machine-readable",
        "count",
        "--config",
        cfg.to_str().unwrap(),
        "--h",
        "0.08",
    ]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["count"], 2);
    assert_eq!(v["bracket"], serde_json::json!([2, 2]));

    let o = stark(&["density", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn bracket_check_writes_records() {
    let dir = tempfile::tempdir().unwrap();
    let text = SMALL_COUNTING
        .replace("kind = \"counting\"", "kind = \"bracketing\"")
        .replace(
            "h_list = [0.08, 0.06, 0.05]",
            "h_list = [0.08]\nmu_list = [3.0, 4.0]",
        );
    let cfg = write_config(dir.path(), "b.toml", &text);
    let o = stark(&[
        "bracket-check",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}{}", stdout(&o), stderr(&o));
    let manifest: serde_json::Value =
        serde_json::from_slice(&fs::read(dir.path().join("small-count.manifest.json")).unwrap())
            .unwrap();
    let recs = manifest["brackets"].as_array().unwrap();
    assert_eq!(recs.len(), 2);
    for r in recs {
        assert!(r["dirichlet"][1].as_u64() <= r["full"][1].as_u64());
        assert!(r["full"][1].as_u64() <= r["neumann"][1].as_u64());
    }
}

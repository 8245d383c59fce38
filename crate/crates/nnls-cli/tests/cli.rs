use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use nnls_cli::config::ExperimentConfig;
use nnls_cli::experiment::{resolve, StoredSolution};
use nnls_cli::report::RunReport;
use nnls_cli::CliError;
use serde_json::{json, Value};
use tempfile::TempDir;

fn examples() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("examples")
}

fn nnls(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nnls")).current_dir(dir).args(args).output().expect("spawn nnls")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn write_config(dir: &Path, name: &str, cfg: &Value) -> String {
    let path = dir.join(name);
    std::fs::write(&path, serde_json::to_string_pretty(cfg).unwrap()).unwrap();
    path.display().to_string()
}

/// V = 0 local-minimum experiment; outputs land in the working directory.
fn small_local() -> Value {
    json!({
        "params": { "N": 3, "p": 3.0, "q": 5.0, "beta": 1.0, "alpha": { "fraction": 0.5, "of": "alpha_V" } },
        "grid": { "r": { "r_alpha_multiple": 2.0 }, "cells": 2048 },
        "branch": "local",
        "sweep": { "r_multiples": [2.0, 4.0] },
        "output": { "report": "out/report.json", "csv": "out/results.csv" }
    })
}

#[test]
fn shipped_configs_resolve() {
    let mut seen = 0;
    for entry in std::fs::read_dir(examples()).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().and_then(|e| e.to_str()) != Some("json") {
            continue;
        }
        let cfg = ExperimentConfig::load(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        let res = resolve(&cfg).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        assert!(res.alpha > 0.0 && res.r > res.ctx.thresholds.r_alpha, "{}", path.display());
        seen += 1;
    }
    assert_eq!(seen, 4);
}

#[test]
fn unknown_field_names_its_path() {
    let mut cfg = small_local();
    cfg["grid"]["cellz"] = json!(10);
    match ExperimentConfig::from_json(&cfg.to_string()) {
        Err(CliError::ConfigInvalid { path, .. }) => assert!(path.starts_with("grid"), "{path}"),
        other => panic!("expected ConfigInvalid, got {other:?}"),
    }
}

#[test]
fn unsorted_axis_exits_4() {
    let dir = TempDir::new().unwrap();
    let mut cfg = small_local();
    cfg["sweep"]["r_multiples"] = json!([4.0, 2.0]);
    let path = write_config(dir.path(), "c.json", &cfg);
    let out = nnls(dir.path(), &["run", "--config", &path]);
    assert_eq!(code(&out), 4, "{}", stderr(&out));
    assert!(stderr(&out).contains("sweep.r_multiples"), "{}", stderr(&out));
}

#[test]
fn local_branch_outside_its_regime_exits_4() {
    let dir = TempDir::new().unwrap();
    let mut above = small_local();
    above["params"]["alpha"] = json!({ "fraction": 1.5, "of": "alpha_V" });
    let mut repulsive = small_local();
    repulsive["params"]["beta"] = json!(-1.0);
    repulsive["params"]["alpha"] = json!(1.0);
    for (name, cfg) in [("above.json", above), ("repulsive.json", repulsive)] {
        let path = write_config(dir.path(), name, &cfg);
        let out = nnls(dir.path(), &["solve", "--config", &path]);
        assert_eq!(code(&out), 4, "{name}: {}", stderr(&out));
        assert!(stderr(&out).contains("regime"), "{name}: {}", stderr(&out));
    }
}

#[test]
fn run_is_reproducible_and_echoes_tolerances() {
    let mut outputs = Vec::new();
    for _ in 0..2 {
        let dir = TempDir::new().unwrap();
        let path = write_config(dir.path(), "c.json", &small_local());
        let out = nnls(dir.path(), &["run", "--config", &path]);
        assert_eq!(code(&out), 0, "{}", stderr(&out));
        let report = std::fs::read(dir.path().join("out/report.json")).unwrap();
        let csv = std::fs::read(dir.path().join("out/results.csv")).unwrap();
        outputs.push((report, csv));
    }
    assert!(outputs[0].0 == outputs[1].0, "report differs between runs");
    assert!(outputs[0].1 == outputs[1].1, "csv differs between runs");

    let text = std::str::from_utf8(&outputs[0].0).unwrap();
    let raw: Value = serde_json::from_str(text).unwrap();
    let checks = &raw["config"]["tolerances"]["checks"];
    assert_eq!(checks["energy_slack"], json!(1e-12));
    assert!(raw["config"]["tolerances"]["solver"]["tol_res_rel"].is_number());
    assert!(raw["environment"]["constants"].is_object());

    let report: RunReport = serde_json::from_str(text).unwrap();
    let mut again = serde_json::to_string_pretty(&report).unwrap();
    again.push('\n');
    assert_eq!(again, text, "report does not round-trip");
    // main solve plus one row per swept radius
    assert_eq!(report.results.len(), 3);
}

#[test]
fn sweep_writes_one_row_per_radius_and_mass() {
    let dir = TempDir::new().unwrap();
    let mut cfg = small_local();
    cfg["sweep"]["alphas"] = json!([{ "fraction": 0.3, "of": "alpha_V" }, { "fraction": 0.5, "of": "alpha_V" }]);
    let path = write_config(dir.path(), "c.json", &cfg);
    let out = nnls(dir.path(), &["sweep", "--config", &path, "--r-geom", "2:8:3", "--out", "rows.csv"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let mut reader = csv::Reader::from_path(dir.path().join("rows.csv")).unwrap();
    let header = reader.headers().unwrap().clone();
    assert_eq!(header.len(), nnls_cli::report::COLUMNS.len());
    let rows: Vec<csv::StringRecord> = reader.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 3 * 2);
    let col = header.iter().position(|h| h == "alpha").unwrap();
    let masses: std::collections::BTreeSet<&str> = rows.iter().map(|r| &r[col]).collect();
    assert_eq!(masses.len(), 2);
}

#[test]
fn verify_accepts_a_stored_solve_and_rejects_a_tampered_one() {
    let dir = TempDir::new().unwrap();
    let path = write_config(dir.path(), "c.json", &small_local());
    let out = nnls(dir.path(), &["solve", "--config", &path, "--out", "solve.json"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let out = nnls(dir.path(), &["verify", "solve.json", "--out", "verify.json"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));

    let text = std::fs::read_to_string(dir.path().join("solve.json")).unwrap();
    let mut stored: StoredSolution = serde_json::from_str(&text).unwrap();
    let mut raw: Value = serde_json::from_str(&text).unwrap();
    let values = raw["result"]["u"]["values"].as_array_mut().unwrap();
    let n = values.len();
    for v in values.iter_mut().take(n / 2).skip(n / 4) {
        *v = json!(v.as_f64().unwrap() * 1.01);
    }
    std::fs::write(dir.path().join("tampered.json"), raw.to_string()).unwrap();
    let out = nnls(dir.path(), &["verify", "tampered.json"]);
    assert_eq!(code(&out), 3, "{}", stderr(&out));
    assert!(stderr(&out).contains("FAIL verify."), "{}", stderr(&out));

    stored.checks.clear();
    let back: StoredSolution = serde_json::from_str(&serde_json::to_string(&stored).unwrap()).unwrap();
    assert_eq!(back, stored);
}

#[test]
fn missing_file_exits_4() {
    let dir = TempDir::new().unwrap();
    let out = nnls(dir.path(), &["verify", "absent.json"]);
    assert_eq!(code(&out), 4);
    let out = nnls(dir.path(), &["run", "--config", "absent.json"]);
    assert_eq!(code(&out), 4);
}

#[test]
fn ranges_parse_and_reject() {
    use nnls_cli::config::parse_range;
    assert_eq!(parse_range("2:16:4", true).unwrap(), vec![2.0, 4.0, 8.0, 16.0]);
    assert_eq!(parse_range("0.5:1:3", false).unwrap(), vec![0.5, 0.75, 1.0]);
    for bad in ["2:16", "a:b:3", "2:16:0", "16:2:3"] {
        assert!(matches!(parse_range(bad, true), Err(CliError::ConfigInvalid { .. })), "{bad}");
    }
}

#[test]
fn exit_status_orders_severities() {
    use nnls_cli::report::{exit_status, Check};
    let ok = Check::at_most("a", "op", 1.0, 2.0);
    let soft = Check::at_most("b", "op", 3.0, 2.0).soft();
    let hard = Check::at_most("c", "op", 3.0, 2.0);
    assert_eq!(exit_status(std::slice::from_ref(&ok)), 0);
    assert_eq!(exit_status(&[ok.clone(), soft.clone()]), 2);
    assert_eq!(exit_status(&[ok, soft, hard]), 3);
    assert_eq!(exit_status(&[]), 0);
}

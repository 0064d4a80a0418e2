use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_deltashell"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn sphere_scatterer(alpha: f64, subdivisions: u32) -> String {
    format!(
        r#"{{"delta": {{"mesh": {{"sphere": {{"radius": 1.0, "subdivisions": {subdivisions}}}}}, "alpha": {{"constant": {alpha}}}}}}}"#
    )
}

fn farfield_config(alpha: f64, subdivisions: u32) -> String {
    format!(
        r#"{{"command": "farfield", "k": 2.0, "scatterer": {},
            "incidence": [{{"plane_wave": {{"direction": [0, 0, 1]}}}}],
            "observations": {{"grid": {{"n_theta": 8, "n_phi": 16}}}}}}"#,
        sphere_scatterer(alpha, subdivisions)
    )
}

/// Data rows of a CSV written by the tool: comment and header skipped.
fn rows(path: &Path) -> Vec<Vec<String>> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn transparent_shell_gives_the_incident_wave() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "f.json",
        &format!(
            r#"{{"command": "forward", "k": 1.5, "scatterer": {},
                "incidence": {{"plane_wave": {{"direction": [0, 0, 1]}}}},
                "points": {{"line": {{"from": [0, 0, -3], "to": [0, 0, 3], "n": 7}}}}}}"#,
            sphere_scatterer(0.0, 1)
        ),
    );
    let out = dir.path().join("out");
    let r = run(&["--quiet", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "forward"]);
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    let field = rows(&out.join("field.csv"));
    assert_eq!(field.len(), 7);
    for row in field {
        let v: Vec<f64> = row[..7].iter().map(|s| s.parse().unwrap()).collect();
        let (re, im) = ((1.5 * v[2]).cos(), (1.5 * v[2]).sin());
        assert_eq!((v[5], v[6]), (0.0, 0.0));
        assert!((v[3] - re).abs() < 1e-15 && (v[4] - im).abs() < 1e-15);
    }
    for name in ["density.csv", "metadata.json"] {
        assert!(out.join(name).exists());
    }
    let header = std::fs::read_to_string(out.join("field.csv")).unwrap();
    let first = header.lines().next().unwrap();
    assert!(first.starts_with("# ") && first.contains("config_digest") && first.contains("conventions"));
}

#[test]
fn malformed_config_names_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let text = farfield_config(2.0, 1).replace("\"n_phi\": 16", "\"n_phi\": 16, \"n_psi\": 3");
    let cfg = write_config(dir.path(), "bad.json", &text);
    let r = run(&["--config", cfg.to_str().unwrap(), "farfield"]);
    assert_eq!(r.status.code(), Some(2));
    let err = String::from_utf8_lossy(&r.stderr);
    assert!(err.contains("observations.grid.n_psi"), "{err}");

    let cfg = write_config(dir.path(), "syntax.json", "{\"command\": \"farfield\",");
    assert_eq!(run(&["--config", cfg.to_str().unwrap(), "farfield"]).status.code(), Some(2));
    // config for another command
    let cfg = write_config(dir.path(), "ok.json", &farfield_config(2.0, 1));
    assert_eq!(run(&["--config", cfg.to_str().unwrap(), "forward"]).status.code(), Some(2));
    assert_eq!(run(&["--config", "/nonexistent/x.json", "farfield"]).status.code(), Some(2));
    assert_eq!(run(&["farfield"]).status.code(), Some(2));
}

#[test]
fn sphere_matches_partial_waves_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "ff.json", &farfield_config(2.0, 3));
    let oracle = write_config(
        dir.path(),
        "or.json",
        r#"{"command": "oracle", "k": 2.0, "radius": 1.0, "alpha": 2.0,
            "observations": {"grid": {"n_theta": 8, "n_phi": 16}}}"#,
    );
    let (a, b, o) = (dir.path().join("a"), dir.path().join("b"), dir.path().join("o"));
    for out in [&a, &b] {
        let r = run(&["--quiet", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "farfield"]);
        assert!(r.status.success());
    }
    assert!(run(&["--quiet", "--config", oracle.to_str().unwrap(), "--out", o.to_str().unwrap(), "oracle"]).status.success());
    let fa = std::fs::read(a.join("farfield.csv")).unwrap();
    assert_eq!(fa, std::fs::read(b.join("farfield.csv")).unwrap());

    let r = run(&[
        "compare",
        a.join("farfield.csv").to_str().unwrap(),
        o.join("farfield.csv").to_str().unwrap(),
        "--tolerance",
        "0.02",
    ]);
    assert!(r.status.success());
    let rep: serde_json::Value = serde_json::from_slice(&r.stdout).unwrap();
    assert!(rep["l2_relative"].as_f64().unwrap() <= 0.02);

    let same = run(&["compare", a.join("farfield.csv").to_str().unwrap(), b.join("farfield.csv").to_str().unwrap()]);
    let rep: serde_json::Value = serde_json::from_slice(&same.stdout).unwrap();
    assert_eq!(rep["l2_relative"].as_f64(), Some(0.0));
    assert_eq!(rep["max_relative"].as_f64(), Some(0.0));

    // a tolerance the data cannot meet is a verification failure
    let strict = run(&[
        "--quiet",
        "compare",
        a.join("farfield.csv").to_str().unwrap(),
        o.join("farfield.csv").to_str().unwrap(),
        "--tolerance",
        "1e-9",
    ]);
    assert_eq!(strict.status.code(), Some(3));
}

#[test]
fn compare_rejects_mismatched_grids_and_missing_files() {
    let dir = tempfile::tempdir().unwrap();
    let small = farfield_config(1.0, 1);
    let large = small.replace("\"n_theta\": 8", "\"n_theta\": 4");
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for (text, out) in [(&small, &a), (&large, &b)] {
        let cfg = write_config(dir.path(), "c.json", text);
        assert!(run(&["--quiet", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "farfield"]).status.success());
    }
    let r = run(&["compare", a.join("farfield.csv").to_str().unwrap(), b.join("farfield.csv").to_str().unwrap()]);
    assert_eq!(r.status.code(), Some(2));
    let r = run(&["compare", a.join("farfield.csv").to_str().unwrap(), "/nonexistent.csv"]);
    assert_eq!(r.status.code(), Some(2));
}

#[test]
fn verify_writes_reports_and_signals_failure() {
    let dir = tempfile::tempdir().unwrap();
    let experiment = |tol: f64| {
        format!(
            r#"{{"command": "verify", "experiments": [
                {{"reciprocity": {{"k": 2.0, "scatterer": {}, "tolerance": {tol},
                  "directions": {{"list": [[1,0,0],[-1,0,0],[0,1,0],[0,-1,0],[0,0,1],[0,0,-1]]}}}}}},
                {{"sommerfeld_oracle": {{"k": 2.0, "radius": 1.0, "alpha": 2.0}}}}]}}"#,
            sphere_scatterer(2.0, 2)
        )
    };
    let out = dir.path().join("ok");
    let cfg = write_config(dir.path(), "v.json", &experiment(0.01));
    let r = run(&["--quiet", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "verify"]);
    assert_eq!(r.status.code(), Some(0), "{}", String::from_utf8_lossy(&r.stderr));
    let bundle: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("reports.json")).unwrap()).unwrap();
    assert_eq!(bundle["pass"], serde_json::json!(true));
    let reports = bundle["reports"].as_array().unwrap();
    assert_eq!(reports.len(), 2);
    for r in reports {
        for key in ["name", "inputs", "inputs_digest", "metrics", "thresholds", "pass", "seconds"] {
            assert!(r.get(key).is_some(), "{key}");
        }
    }
    assert!(bundle["config_digest"].is_string() && bundle["conventions"].is_object());

    let cfg = write_config(dir.path(), "v0.json", &experiment(0.0));
    let r = run(&["--quiet", "--config", cfg.to_str().unwrap(), "--out", dir.path().join("bad").to_str().unwrap(), "verify"]);
    assert_eq!(r.status.code(), Some(3));
}

#[test]
fn acoustic_writes_one_table_per_frequency() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "a.json",
        r#"{"command": "acoustic",
            "medium": {"gamma": {"sphere": {"radius": 0.7}}, "shell_density": 1.0,
                       "cutoff": {"radius": 1.5, "width": 0.5}},
            "resolution": {"subdivisions": 1, "cells_per_axis": 6},
            "frequencies": [1.0, 2.0],
            "incidence": {"list": [[0, 0, 1]]},
            "observations": {"grid": {"n_theta": 4, "n_phi": 8}}}"#,
    );
    let out = dir.path().join("out");
    let r = run(&["--quiet", "--threads", "1", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "acoustic"]);
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    assert_eq!(rows(&out.join("farfield_0.csv")).len(), 32);
    assert_eq!(rows(&out.join("farfield_1.csv")).len(), 32);
    let meta: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("metadata.json")).unwrap()).unwrap();
    assert_eq!(meta["runs"].as_array().unwrap().len(), 2);
    assert!(meta["runs"][0]["diagnostics"]["rho_min"].as_f64().unwrap() >= 1.0);
}

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn kpb(sub: &str, config: &Path, out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kpb"))
        .args([sub, "--config"])
        .arg(config)
        .arg("--out")
        .arg(out)
        .args(["--threads", "1"])
        .output()
        .expect("binary runs")
}

fn write_config(dir: &TempDir, name: &str, text: &str) -> std::path::PathBuf {
    let p = dir.path().join(name);
    fs::write(&p, text).unwrap();
    p
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn manifest(out: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap()
}

const ZERO_SOLVE: &str = r#"{
  "command": "solve",
  "nx": 16, "ny": 16, "Lx": 3.141592653589793, "Ly": 3.141592653589793,
  "T": 0.1, "M": 16, "tol": 1e-12, "max_iter": 20,
  "integrator": "picard",
  "phi_spec": {"kind": "modes", "modes": []}
}"#;

#[test]
fn solve_zero_data_gives_zero_trajectory() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "zero.json", ZERO_SOLVE);
    let out = dir.path().join("out");
    let o = kpb("solve", &cfg, &out);
    assert!(o.status.success(), "{}", stderr(&o));
    let history = fs::read_to_string(out.join("history.csv")).unwrap();
    let rows: Vec<&str> = history.lines().collect();
    assert_eq!(rows[0], "t,l2_norm");
    assert_eq!(rows.len(), 18);
    for row in &rows[1..] {
        assert_eq!(row.split(',').nth(1).unwrap().parse::<f64>().unwrap(), 0.0);
    }
    let m = manifest(&out);
    assert_eq!(m["command"], "solve");
    assert_eq!(m["config_sha256"].as_str().unwrap().len(), 64);
    assert_eq!(m["tolerances"]["picard_tol"], 1e-12);
    assert_eq!(m["window"]["taper_fraction"], 0.1);
    assert_eq!(m["results"]["solver"]["converged"], true);
}

#[test]
fn solve_then_norms_round_trip() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        &dir,
        "g.json",
        r#"{"command": "solve", "nx": 32, "ny": 32, "Lx": 3.141592653589793, "Ly": 3.141592653589793,
            "T": 0.5, "M": 32, "tol": 1e-12, "max_iter": 50, "integrator": "etd",
            "phi_spec": {"kind": "gaussian", "amplitude": 0.5, "widths": [0.8, 0.8]}}"#,
    );
    let out = dir.path().join("run");
    let o = kpb("solve", &cfg, &out);
    assert!(o.status.success(), "{}", stderr(&o));
    let norms_cfg = write_config(
        &dir,
        "n.json",
        r#"{"command": "norms", "input_path": "run/trajectory.json", "b": 0.5, "s1": 0.0, "s2": 0.0}"#,
    );
    let nout = dir.path().join("norms");
    let o = kpb("norms", &norms_cfg, &nout);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = fs::read_to_string(nout.join("norms.csv")).unwrap();
    let row: Vec<f64> = csv.lines().nth(1).unwrap().split(',').map(|v| v.parse().unwrap()).collect();
    assert_eq!(row.len(), 6);
    assert!(row[3] > 0.0 && row[4] > 0.0);
    assert!(row[5] >= 1.0 / 3.0 && row[5] <= 3.0);
    let sob = fs::read_to_string(nout.join("sobolev.csv")).unwrap();
    assert_eq!(sob.lines().count(), 34);
}

#[test]
fn malformed_config_exits_2_without_outputs() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "bad.json", "{\n  \"command\": \"solve\",\n  \"nx\": 16\n  \"ny\": 16\n}");
    let out = dir.path().join("out");
    let o = kpb("solve", &cfg, &out);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("bad.json:4:"), "{}", stderr(&o));
    assert!(!out.exists());
}

#[test]
fn range_violation_names_the_field() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "m.json", &ZERO_SOLVE.replace("\"M\": 16", "\"M\": 4"));
    let out = dir.path().join("out");
    let o = kpb("solve", &cfg, &out);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("`M`"), "{}", stderr(&o));
    assert!(!out.exists());
    let o = kpb("verify", &write_config(&dir, "z.json", ZERO_SOLVE), &out);
    assert_eq!(o.status.code(), Some(2));
    assert!(!out.exists());
}

#[test]
fn non_convergence_exits_3_without_outputs() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        &dir,
        "nc.json",
        r#"{"command": "solve", "nx": 32, "ny": 32, "Lx": 3.141592653589793, "Ly": 3.141592653589793,
            "T": 0.1, "M": 16, "tol": 1e-14, "max_iter": 2, "integrator": "picard",
            "phi_spec": {"kind": "gaussian", "amplitude": 1.0, "widths": [0.8, 0.8]}}"#,
    );
    let out = dir.path().join("out");
    let o = kpb("solve", &cfg, &out);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    assert!(!out.exists());
}

#[test]
fn verify_runs_are_byte_identical() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        &dir,
        "v.json",
        r#"{"command": "verify", "estimate_id": "free", "suite_size": 6, "seed": 42,
            "params": {"b": [0.0, 0.5], "s1": [0.0], "s2": [0.0], "resolution": "both"}}"#,
    );
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    assert!(kpb("verify", &cfg, &a).status.success());
    assert!(kpb("verify", &cfg, &b).status.success());
    for name in ["ratios.csv", "ratios_refined.csv"] {
        let x = fs::read(a.join(name)).unwrap();
        assert_eq!(x, fs::read(b.join(name)).unwrap(), "{name}");
        assert_eq!(String::from_utf8(x).unwrap().lines().count(), 13);
    }
    let m = manifest(&a);
    let factors = m["results"]["refinement_factors"].as_array().unwrap();
    assert_eq!(factors.len(), 2);
    for f in factors {
        let f: f64 = f.as_str().unwrap().parse().unwrap();
        assert!((0.5..=2.0).contains(&f));
    }
}

#[test]
fn smoothing_and_bilinear_verify() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        &dir,
        "s.json",
        r#"{"command": "verify", "estimate_id": "smoothing", "suite_size": 3, "seed": 1,
            "params": {"xi": [0.0, 4.0], "delta": [0.25], "resolution": "base"}}"#,
    );
    let out = dir.path().join("s");
    assert!(kpb("verify", &cfg, &out).status.success());
    assert_eq!(fs::read_to_string(out.join("ratios.csv")).unwrap().lines().count(), 7);
    let cfg = write_config(
        &dir,
        "b.json",
        r#"{"command": "verify", "estimate_id": "bilinear", "suite_size": 2, "seed": 1,
            "params": {"s1": [-0.2], "T": 0.5, "resolution": "base"}}"#,
    );
    let out = dir.path().join("b");
    let o = kpb("verify", &cfg, &out);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = fs::read_to_string(out.join("ratios.csv")).unwrap();
    assert!(csv.lines().nth(1).unwrap().starts_with("bilinear,"));
}

#[test]
fn illposed_sweep_writes_four_rows_and_slope() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        &dir,
        "i.json",
        r#"{"command": "illposed", "s": -0.7, "eps0": 0.01, "N_list": [16, 32, 64, 128],
            "cells": 64, "samples": 10000, "seed": 3}"#,
    );
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    let o = kpb("illposed", &cfg, &a);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(kpb("illposed", &cfg, &b).status.success());
    let csv = fs::read_to_string(a.join("scaling.csv")).unwrap();
    assert_eq!(csv, fs::read_to_string(b.join("scaling.csv")).unwrap());
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "N,s,eps0,t_N,norm_phi,norm_u2,cells,max_chi_ratio");
    assert_eq!(lines.len(), 5);
    for l in &lines[1..] {
        let chi: f64 = l.split(',').nth(7).unwrap().parse().unwrap();
        assert!(chi > 0.0 && chi <= 100.0);
    }
    let slope: f64 = manifest(&a)["results"]["slope"].as_str().unwrap().parse().unwrap();
    assert!(slope > 0.0);
}

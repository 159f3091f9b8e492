//! Command-line contract: exit codes, manifests, determinism.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn lab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lab")).args(args).output().expect("lab runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap_or(-1)
}

fn manifest(dir: &Path) -> Value {
    serde_json::from_slice(&fs::read(dir.join("manifest.json")).unwrap()).unwrap()
}

#[test]
fn gamma_stdout_is_deterministic() {
    let a = lab(&["gamma", "--s", "0.005", "--eps", "0.05,0.1,0.2"]);
    let b = lab(&["gamma", "--s", "0.005", "--eps", "0.05,0.1,0.2"]);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "b,s,eps,L_quadrature,L_asymptotic,remainder,remainder_scaled");
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(row.len(), 7);
    // 17 significant digits
    assert_eq!(row[3].split('e').next().unwrap().replace(['.', '-'], "").len(), 17);
}

#[test]
fn gamma_json_format() {
    let o = lab(&["--format", "json", "gamma", "--s", "0", "--eps", "0.1"]);
    assert_eq!(code(&o), 0);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    let row = &v[0];
    let rem = row["L_quadrature"].as_f64().unwrap() - row["L_asymptotic"].as_f64().unwrap();
    assert_eq!(row["remainder"].as_f64().unwrap(), rem);
}

#[test]
fn bad_parameters_exit_2() {
    assert_eq!(code(&lab(&["gamma", "--s", "0.005", "--eps", "-0.1"])), 2);
    assert_eq!(code(&lab(&["gamma", "--s", "0.005", "--eps", "0"])), 2);
    assert_eq!(code(&lab(&["--b", "4", "gamma", "--s", "0", "--eps", "0.1"])), 2);
    assert_eq!(code(&lab(&["--b", "3", "gamma", "--s", "0", "--eps", "0.1"])), 2);
    assert_eq!(code(&lab(&["minimize", "--s", "0", "--eps", "0.1"])), 2);
    assert_eq!(code(&lab(&["verify", "nonsense"])), 2);
    assert_eq!(code(&lab(&["frobnicate"])), 2);
    assert_eq!(code(&lab(&["geometry", "--input", "/nonexistent/curve.json"])), 2);
}

#[test]
fn empty_levelset_grid_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(&cfg, r#"{"eps_grid": [], "zeta_grid": []}"#).unwrap();
    assert_eq!(code(&lab(&["--config", cfg.to_str().unwrap(), "levelset"])), 2);
}

#[test]
fn unknown_config_field_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(&cfg, r#"{"b": 5, "colour": "red"}"#).unwrap();
    let o = lab(&["--config", cfg.to_str().unwrap(), "gamma", "--s", "0", "--eps", "0.1"]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("colour"));
}

#[test]
fn config_values_apply_and_flags_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(&cfg, r#"{"b": 7}"#).unwrap();
    let c = cfg.to_str().unwrap();
    let o = String::from_utf8(lab(&["--config", c, "gamma", "--s", "0", "--eps", "0.1"]).stdout).unwrap();
    assert!(o.lines().nth(1).unwrap().starts_with("7,"));
    let o = String::from_utf8(lab(&["--config", c, "--b", "5", "gamma", "--s", "0", "--eps", "0.1"]).stdout).unwrap();
    assert!(o.lines().nth(1).unwrap().starts_with("5,"));
}

#[test]
fn manifest_lists_outputs_with_hashes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let cfg = dir.path().join("cfg.json");
    fs::write(&cfg, "{}").unwrap();
    let o = lab(&["--out", out.to_str().unwrap(), "--config", cfg.to_str().unwrap(), "--seed", "7", "levelset", "--eps", "0.1", "--zeta", "1e-10,1e-8"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let m = manifest(&out);
    for key in ["command", "params", "rng_seed", "tool_version", "timestamp", "input_hashes", "output_files"] {
        assert!(m.get(key).is_some(), "missing {key}");
    }
    assert_eq!(m["command"], "levelset");
    assert_eq!(m["rng_seed"], 7);
    assert_eq!(m["input_hashes"].as_object().unwrap().len(), 1);
    let files = m["output_files"].as_array().unwrap();
    assert!(files.iter().any(|f| f["path"] == "result.csv"));
    for f in files {
        let bytes = fs::read(out.join(f["path"].as_str().unwrap())).unwrap();
        let digest = Command::new("sha256sum").arg(out.join(f["path"].as_str().unwrap())).output();
        if let Ok(d) = digest {
            let hex = String::from_utf8(d.stdout).unwrap();
            assert_eq!(hex.split_whitespace().next().unwrap(), f["sha256"].as_str().unwrap());
        }
        assert!(!bytes.is_empty());
    }
}

#[test]
fn minimize_small_budget_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let out = dir.path().join(name);
        let o = lab(&["--out", out.to_str().unwrap(), "minimize", "--s", "0.005", "--eps", "0.1", "--nodes", "200", "--seeds", "2", "--no-shooting"]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        (fs::read(out.join("result.json")).unwrap(), manifest(&out))
    };
    let (a, ma) = run("a");
    let (b, mb) = run("b");
    assert_eq!(a, b);
    assert_eq!(ma["output_files"], mb["output_files"]);
    let rep: Value = serde_json::from_slice(&a).unwrap();
    assert_eq!(rep["budget"]["low_budget"], true);
    assert_eq!(rep["beaten"], false);
    assert_eq!(rep["seed_list"], serde_json::json!([0, 1]));
}

#[test]
fn geometry_reads_csv_and_reports_loops() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("fig8.csv");
    // a curve that crosses itself once
    fs::write(&input, "t,x1,x2\n0,0,0\n1,1,1\n2,1,0\n3,0,1\n").unwrap();
    let out = dir.path().join("run");
    let o = lab(&["--out", out.to_str().unwrap(), "geometry", "--input", input.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v: Value = serde_json::from_slice(&fs::read(out.join("result.json")).unwrap()).unwrap();
    assert_eq!(v["loops"].as_array().unwrap().len(), 1);
    assert!(manifest(&out)["input_hashes"].as_object().unwrap().keys().any(|k| k.ends_with("fig8.csv")));
}

#[test]
fn verify_martinet_passes() {
    let o = lab(&["verify", "martinet"]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.lines().filter(|l| l.starts_with("PASS")).count() >= 2);
}

#[test]
fn shoot_writes_trace() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let o = lab(&["--out", out.to_str().unwrap(), "shoot", "--s", "0.005", "--eps", "0.1", "--theta", "1.5", "--lambda", "-1e9"]);
    assert!(matches!(code(&o), 0 | 1));
    let v: Value = serde_json::from_slice(&fs::read(out.join("result.json")).unwrap()).unwrap();
    assert!(v["t_final"].as_f64().unwrap() > 0.0);
    assert!(out.join("curves/trace.json").exists());
}

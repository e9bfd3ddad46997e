use std::path::Path;
use std::process::{Command, Output};

use cot_lab::cli::{manifest_path, RunManifest};
use serde_json::Value;

fn cot_lab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cot-lab"))
        .args(args)
        .env_remove("COT_LAB_THREADS")
        .output()
        .expect("spawn cot-lab")
}

fn ok(args: &[&str]) -> String {
    let out = cot_lab(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn manifest(out: &Path) -> RunManifest {
    serde_json::from_slice(&std::fs::read(manifest_path(out)).unwrap()).unwrap()
}

#[test]
fn rho_out_of_range_exits_one() {
    let out = cot_lab(&["binary-curves", "--rho", "0.6"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("rho must lie in (0, 1/2)"));
}

#[test]
fn unknown_flag_prints_usage() {
    let out = cot_lab(&["gamma-star", "--lambdas", "1.5,0.5", "--frobnicate"]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("Usage"), "{err}");
    assert!(out.stdout.is_empty());
}

#[test]
fn binary_curves_csv_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("fig1.csv");
    ok(&["binary-curves", "--rho", "0.25", "--points", "512", "--out", path_str(&csv)]);
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "theta,d_lower,d_sep,d_uncoded,d_hybrid,d_hybrid_simple,delta1_opt,delta1_prime"
    );
    assert_eq!(lines.count(), 512);
    assert!(!text.contains('\r'));

    let m = manifest(&csv);
    assert_eq!(m.outputs, vec![csv.display().to_string()]);
    assert_eq!(m.config_hash.len(), 64);
    assert_eq!(m.library_version, env!("CARGO_PKG_VERSION"));
    assert_eq!(m.seed, None);
    assert!(m.command_line.iter().any(|a| a == "binary-curves"));
}

#[test]
fn config_hash_tracks_numeric_inputs() {
    let dir = tempfile::tempdir().unwrap();
    let hash = |name: &str, rho: &str| {
        let out = dir.path().join(name);
        ok(&["binary-curves", "--rho", rho, "--points", "16", "--out", path_str(&out)]);
        manifest(&out).config_hash
    };
    assert_eq!(hash("a.csv", "0.25"), hash("b.csv", "0.25"));
    assert_ne!(hash("a.csv", "0.25"), hash("c.csv", "0.3"));
}

#[test]
fn gaussian_curves_and_gamma_star() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("fig5.csv");
    ok(&["gaussian-curves", "--lambdas", "1.5,0.5", "--log-grid", "--points", "64", "--out", path_str(&csv)]);
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("gamma,d_lower,d_sep,d_uncoded,d_hybrid,alpha_opt\n"));
    assert_eq!(text.lines().count(), 65);

    let v: Value = serde_json::from_str(&ok(&["gamma-star", "--lambdas", "1.5,0.5", "--json"])).unwrap();
    let g = v["gamma_star"].as_f64().unwrap();
    assert!((g - (2.5f64.sqrt() - 0.5)).abs() < 1e-12);
}

#[test]
fn thresholds_json() {
    let v: Value = serde_json::from_str(&ok(&["binary-thresholds", "--rho", "0.35", "--json"])).unwrap();
    let s = v["switches"].as_array().unwrap();
    assert_eq!(s.len(), 2);
    assert_eq!(s[0]["from"], "SEP");
    assert_eq!(s[0]["to"], "UNCODED");
    assert_eq!(s[1]["to"], "SIMPLE");
}

#[test]
fn json_inputs() {
    let dir = tempfile::tempdir().unwrap();
    let ch = dir.path().join("bsc.json");
    std::fs::write(&ch, r#"{"matrix": [[0.9, 0.1], [0.1, 0.9]], "cost": [0, 1]}"#).unwrap();
    let v: Value = serde_json::from_str(&ok(&["capacity", "--channel", path_str(&ch), "--json"])).unwrap();
    let c = v["capacity"].as_f64().unwrap();
    let hb = -(0.1f64 * 0.1f64.log2() + 0.9 * 0.9f64.log2());
    assert!((c - (1.0 - hb)).abs() < 1e-6);
    let v: Value =
        serde_json::from_str(&ok(&["capacity", "--channel", path_str(&ch), "--gamma", "0.1", "--json"])).unwrap();
    assert!(v["capacity"].as_f64().unwrap() < c);
    assert!(v["expected_cost"].as_f64().unwrap() <= 0.1 + 1e-9);

    let prob = dir.path().join("ot.json");
    std::fs::write(
        &prob,
        r#"{"row": {"probs": [0.75, 0.25]}, "col": {"probs": [0.5, 0.5]}, "cost": [[0, 1], [1, 0]]}"#,
    )
    .unwrap();
    let v: Value = serde_json::from_str(&ok(&["ot", "--problem", path_str(&prob), "--json"])).unwrap();
    assert!((v["d_star"].as_f64().unwrap() - 0.25).abs() < 1e-12);
    let v: Value =
        serde_json::from_str(&ok(&["rl-ot", "--problem", path_str(&prob), "--rate", "0,0.5", "--json"])).unwrap();
    let pts = v["points"].as_array().unwrap();
    assert!((pts[0]["distortion"].as_f64().unwrap() - 0.5).abs() < 1e-6);
    assert!(pts[1]["distortion"].as_f64().unwrap() < 0.5);

    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"matrix": [[0.9, 0.2], [0.1, 0.9]]}"#).unwrap();
    assert_eq!(cot_lab(&["capacity", "--channel", path_str(&bad)]).status.code(), Some(1));
}

#[test]
fn hybrid_eval_roundtrip() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("spec.json");
    let s = cot_lab::binary::uncoded_spec(0.25, 0.25).unwrap();
    std::fs::write(&spec, serde_json::to_string(&s).unwrap()).unwrap();
    let v: Value = serde_json::from_str(&ok(&["hybrid-eval", "--spec", path_str(&spec), "--json"])).unwrap();
    assert!((v["e_dist"].as_f64().unwrap() - 0.25).abs() < 1e-12);
    assert_eq!(v["feasible"], true);
}

#[test]
fn simulate_report_schema() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    let args = ["simulate", "uncoded-binary", "--rho", "0.5", "--theta", "0.1", "--samples", "50000"];
    ok(&[&args[..], &["--seed", "3", "--out", path_str(&out)]].concat());
    let v: Value = serde_json::from_slice(&std::fs::read(&out).unwrap()).unwrap();
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["scheme"], "uncoded-binary");
    assert_eq!(v["samples"], 50000);
    assert_eq!(v["empirical_marginal"]["kind"], "discrete");
    assert_eq!(manifest(&out).seed, Some(3));
}

#[test]
fn emit_plot_from_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("g.csv");
    ok(&["gaussian-curves", "--lambdas", "1.5,0.5", "--points", "32", "--out", path_str(&csv)]);
    ok(&["emit-plot", "--csv", path_str(&csv), "--figure", "fig6"]);
    let script = std::fs::read_to_string(dir.path().join("fig6.gp")).unwrap();
    assert!(script.contains("'g.csv' skip 1 using 1:6"));
    assert_eq!(script.matches(" with lines ").count(), 1);

    let out = cot_lab(&["emit-plot", "--csv", path_str(&csv), "--figure", "fig1"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("schema mismatch"));

    let empty = dir.path().join("empty.csv");
    std::fs::write(&empty, "").unwrap();
    let target = dir.path().join("e.gp");
    let out = cot_lab(&["emit-plot", "--csv", path_str(&empty), "--figure", "fig1", "--out", path_str(&target)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(!target.exists());
}

#[test]
fn threads_env_is_validated() {
    let out = Command::new(env!("CARGO_BIN_EXE_cot-lab"))
        .args(["simulate", "uncoded-binary", "--rho", "0.5", "--theta", "0.1", "--samples", "10"])
        .env("COT_LAB_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

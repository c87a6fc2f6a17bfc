//! The `oscspec` binary: determinism and exit-status contract.

use std::fs;
use std::path::Path;
use std::process::Command;

fn oscspec() -> Command {
    Command::new(env!("CARGO_BIN_EXE_oscspec"))
}

fn write_config(dir: &Path, name: &str, body: &str) -> std::path::PathBuf {
    let p = dir.join(name);
    fs::write(&p, body).unwrap();
    p
}

const COS_X: &str = r#"{"alpha": 1, "terms": [[1, 0, 0.5, 0], [-1, 0, 0.5, 0]], "nmax": 120}"#;

#[test]
fn compute_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "cos.json", COS_X);
    let mut outputs = Vec::new();
    for run in 0..2 {
        let out = dir.path().join(format!("run{run}.csv"));
        let status = oscspec()
            .args(["compute", "--config"])
            .arg(&cfg)
            .arg("--out")
            .arg(&out)
            .status()
            .unwrap();
        assert!(status.success());
        let meta = fs::read(dir.path().join(format!("run{run}.meta.json"))).unwrap();
        outputs.push((fs::read(&out).unwrap(), meta));
    }
    assert_eq!(outputs[0], outputs[1]);
    let csv = String::from_utf8(outputs[0].0.clone()).unwrap();
    let lines: Vec<&str> = csv.trim_end().split("\r\n").collect();
    assert_eq!(lines[0], "n,lambda_numeric,lambda_unperturbed,c0,w_term,residual,scaled_residual,alt_scaled");
    assert_eq!(lines.len(), 1 + 121);
    let scaled = lines[1..].iter().filter(|l| !l.ends_with(",,")).count();
    assert_eq!(scaled, 118);
    let meta: serde_json::Value = serde_json::from_slice(&outputs[0].1).unwrap();
    assert_eq!(meta["config"]["tol"], 1e-8);
    assert_eq!(meta["config"]["epsilon"], 0.5);
    assert!(meta["trusted_max"].as_u64().unwrap() >= 120);
}

#[test]
fn zero_potential_residuals_vanish() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "zero.json", r#"{"alpha": 2, "terms": [], "nmax": 50}"#);
    let out = dir.path().join("zero.csv");
    assert!(oscspec().args(["compute", "--config"]).arg(&cfg).arg("--out").arg(&out).status().unwrap().success());
    let csv = fs::read_to_string(&out).unwrap();
    for line in csv.lines().skip(1) {
        let residual: f64 = line.split(',').nth(5).unwrap().parse().unwrap();
        assert!(residual.abs() <= 1e-9, "{line}");
    }
}

#[test]
fn nmax_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "cos.json", COS_X);
    let out = dir.path().join("small.csv");
    let status = oscspec()
        .args(["compute", "--nmax", "10", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    assert_eq!(fs::read_to_string(&out).unwrap().lines().count(), 12);
}

#[test]
fn invalid_config_fails_with_message() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "bad.json", r#"{"alpha": 1, "terms": [[1, 0, 0.5, 0]], "nmax": 10}"#);
    let out = oscspec()
        .args(["compute", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path().join("x.csv"))
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("no mirror"));
    assert!(!dir.path().join("x.csv").exists());
}

#[test]
fn verify_reports_and_exit_status() {
    let dir = tempfile::tempdir().unwrap();
    let zero = write_config(dir.path(), "zero.json", r#"{"alpha": 1, "terms": [], "nmax": 10}"#);
    let csv = dir.path().join("checks.csv");
    let out = oscspec()
        .args(["verify", "--suite", "all", "--config"])
        .arg(&zero)
        .arg("--out")
        .arg(&csv)
        .output()
        .unwrap();
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(out.status.success(), "{text}");
    assert!(text.lines().all(|l| l.starts_with("PASS")));
    assert!(fs::read_to_string(&csv).unwrap().starts_with("suite,check,value,limit,passed"));

    let cos = write_config(dir.path(), "cos.json", COS_X);
    let out = oscspec().args(["verify", "--suite", "bessel", "--config"]).arg(&cos).output().unwrap();
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("max |J_n(x)| sqrt(x) / 4"));

    let out = oscspec().args(["verify", "--suite", "bogus", "--config"]).arg(&cos).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn verify_seed_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cos = write_config(dir.path(), "cos.json", COS_X);
    let run = |seed: &str| {
        oscspec()
            .args(["verify", "--suite", "matelem", "--seed", seed, "--config"])
            .arg(&cos)
            .output()
            .unwrap()
    };
    let (a, b) = (run("7"), run("7"));
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn matelem_prints_three_routes() {
    let out = oscspec()
        .args(["matelem", "--ax", "1", "--axi", "0", "--k", "0", "--kprime", "0"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let e = (-0.25f64).exp();
    for route in ["closed_form", "quadrature", "bessel_series"] {
        let re = v[route][0].as_f64().unwrap();
        assert!((re - e).abs() < 1e-10, "{route}: {re}");
    }
}

#[test]
fn trace_diagnostics_run() {
    let dir = tempfile::tempdir().unwrap();
    let cos = write_config(dir.path(), "cos.json", COS_X);
    let json = dir.path().join("trace.json");
    let status = oscspec()
        .args(["trace", "--nmax", "40", "--epsilon", "0.25", "--config"])
        .arg(&cos)
        .arg("--out")
        .arg(&json)
        .status()
        .unwrap();
    assert!(status.success());
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&json).unwrap()).unwrap();
    assert!(v["difference"].as_f64().unwrap().abs() < 1e-6);
    assert_eq!(v["epsilon"], 0.25);
}

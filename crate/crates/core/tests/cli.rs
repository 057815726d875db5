//! End-to-end runs of the `oamqi` binary.

use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn oamqi(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_oamqi"))
        .arg("--out")
        .arg(out)
        .args(args)
        .env_remove("OAMQI_OUT_DIR")
        .output()
        .expect("binary runs")
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn h_integral_writes_envelope() {
    let dir = tempfile::tempdir().unwrap();
    let out = oamqi(dir.path(), &["h-integral"]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let v = read_json(&dir.path().join("h_integral.json"));
    assert_eq!(v["command"], "h-integral");
    assert_eq!(v["seed"], 2016);
    assert_eq!(v["config_hash"].as_str().unwrap().len(), 64);
    let h = v["result"]["h"]["value"].as_f64().unwrap();
    assert!((h - 0.242).abs() < 0.005, "h = {h}");
}

#[test]
fn fig2b_normalizes_to_l0() {
    let dir = tempfile::tempdir().unwrap();
    let out = oamqi(dir.path(), &["reproduce", "fig2b"]);
    assert!(out.status.success());
    let csv = std::fs::read_to_string(dir.path().join("fig2b/efficiency_curve.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows[0], "l,relative_efficiency,quantum_efficiency");
    assert!(rows[1].starts_with("0,1,"));
    assert!(csv.contains("# command=reproduce fig2b"));
}

#[test]
fn seeded_reruns_are_byte_identical() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let args = ["--seed", "77", "g2-sim", "--duration", "0.05", "--clicks"];
    assert!(oamqi(a.path(), &args).status.success());
    assert!(oamqi(b.path(), &args).status.success());
    for name in ["g2_source.json", "clicks_source.csv"] {
        let x = std::fs::read(a.path().join(name)).unwrap();
        let y = std::fs::read(b.path().join(name)).unwrap();
        assert_eq!(x, y, "{name} differs between reruns");
    }
}

#[test]
fn bad_config_reports_json_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    std::fs::write(&cfg, r#"{"bogus": 1}"#).unwrap();
    let out = oamqi(
        dir.path(),
        &["--config", cfg.to_str().unwrap(), "h-integral"],
    );
    assert_eq!(out.status.code(), Some(1));
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"], "config");
    assert!(!dir.path().join("h_integral.json").exists());
}

#[test]
fn invalid_argument_exits_with_usage_code() {
    let dir = tempfile::tempdir().unwrap();
    let out = oamqi(dir.path(), &["reproduce", "fig9z"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn out_dir_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_oamqi"))
        .env("OAMQI_OUT_DIR", dir.path())
        .arg("loss-chain")
        .output()
        .unwrap();
    assert!(out.status.success());
    let v = read_json(&dir.path().join("loss_chain.json"));
    let eta = v["result"]["internal_efficiency"].as_f64().unwrap();
    assert!((eta - 0.061).abs() < 1e-3);
}

#[test]
fn embedded_config_reproduces_run() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    assert!(
        oamqi(a.path(), &["--seed", "5", "interference", "--l", "2"])
            .status
            .success()
    );
    let first = read_json(&a.path().join("interference_l2.json"));
    let cfg = b.path().join("embedded.json");
    std::fs::write(&cfg, serde_json::to_string(&first["config"]).unwrap()).unwrap();
    let out = oamqi(
        b.path(),
        &[
            "--config",
            cfg.to_str().unwrap(),
            "interference",
            "--l",
            "2",
        ],
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    for name in ["interference_l2.json", "interference_l2.csv"] {
        assert_eq!(
            std::fs::read(a.path().join(name)).unwrap(),
            std::fs::read(b.path().join(name)).unwrap(),
            "{name}"
        );
    }
}

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn aloha(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_aloha")).args(args).env_remove("ALOHA_WORKERS").output().expect("binary runs")
}

fn stderr_json(out: &Output) -> serde_json::Value {
    let text = String::from_utf8(out.stderr.clone()).unwrap();
    serde_json::from_str(text.lines().next().expect("one stderr line")).expect("stderr line is JSON")
}

#[test]
fn table_written_to_out_matches_golden_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("table1.csv");
    let config = configs().join("table1.json");
    let status = aloha(&["table", "--config", config.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
    assert!(status.stdout.is_empty());
    let golden = include_str!("../../core/tests/data/table1.csv");
    assert_eq!(std::fs::read_to_string(out).unwrap(), golden);
}

#[test]
fn rayleigh_prints_to_stdout() {
    let out = aloha(&["rayleigh", "--config", configs().join("rayleigh_psuc.json").to_str().unwrap()]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("rho,Psuc"));
    let first: Vec<f64> = lines.next().unwrap().split(',').map(|x| x.parse().unwrap()).collect();
    // A lone packet decodes iff its exponential gain exceeds b / gamma.
    let lone = (-10f64.powf(0.3) / 100.0).exp();
    assert_eq!(first[0], 0.0);
    assert!((first[1] - lone).abs() < 1e-11, "{} vs {lone}", first[1]);
    assert_eq!(lines.count(), 32);
}

#[test]
fn unknown_config_key_is_a_json_error() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("bad.json");
    std::fs::write(&config, r#"{"gamma_db": 20, "threshold_db": 3, "rho": {"values": [1]}, "gama": 1}"#).unwrap();
    let out = aloha(&["rayleigh", "--config", config.to_str().unwrap()]);
    assert!(!out.status.success());
    assert!(out.stdout.is_empty());
    let err = stderr_json(&out);
    assert_eq!(err["error"], "config");
    assert!(err["message"].as_str().unwrap().contains("gama"));
}

#[test]
fn missing_config_is_an_io_error() {
    let out = aloha(&["de", "--config", "/nonexistent/de.json"]);
    assert!(!out.status.success());
    assert_eq!(stderr_json(&out)["error"], "io");
}

#[test]
fn zero_workers_rejected() {
    let config = configs().join("sim_urllc_embb_d2.json");
    let out = aloha(&["sim", "--config", config.to_str().unwrap(), "--runs", "10", "--workers", "0"]);
    assert!(!out.status.success());
    assert_eq!(stderr_json(&out)["error"], "invalid");
}

#[test]
fn sim_output_independent_of_worker_env() {
    let config = configs().join("sim_rayleigh.json");
    let args = ["sim", "--config", config.to_str().unwrap(), "--runs", "200"];
    let one = Command::new(env!("CARGO_BIN_EXE_aloha")).args(args).env("ALOHA_WORKERS", "1").output().unwrap();
    let many = Command::new(env!("CARGO_BIN_EXE_aloha")).args(args).env("ALOHA_WORKERS", "5").output().unwrap();
    assert!(one.status.success() && many.status.success());
    assert_eq!(one.stdout, many.stdout);
}

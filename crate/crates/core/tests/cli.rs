use std::process::{Command, Output};

use serde_json::Value;

fn streamx(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_streamx")).args(args).env("STREAMX_THREADS", "1").output().unwrap()
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn info_reports_capacity_and_dispersion() {
    let v = json(&streamx(&["info", "--channel", "bsc:0.11"]));
    assert!((v["capacity_bits"].as_f64().unwrap() - 0.5001).abs() < 1e-3);
    assert!((v["dispersion_bits2"].as_f64().unwrap() - 0.8907).abs() < 1e-3);
}

#[test]
fn exponent_kinds_agree_on_a_symmetric_channel() {
    let sp = json(&streamx(&["exponent", "--channel", "bsc:0.11", "--kind", "sp", "--rate", "0.3"]));
    let h = json(&streamx(&["exponent", "--channel", "bsc:0.11", "--kind", "haroutunian", "--rate", "0.3"]));
    let (a, b) = (sp["value_bits"].as_f64().unwrap(), h["value_bits"].as_f64().unwrap());
    assert!(a > 0.0 && (a - b).abs() <= 1e-3, "{a} vs {b}");
}

#[test]
fn simulate_prints_the_summary_csv_and_records() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"n": 8, "M": 3, "T": 2, "S": 2, "channel": "bsc:0.05", "master_seed": 7}"#).unwrap();
    let records = dir.path().join("trials.jsonl");
    let out = streamx(&[
        "simulate",
        "--config",
        cfg.to_str().unwrap(),
        "--trials",
        "200",
        "--records",
        records.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "k,errors,trials,eps_hat,ci_lo,ci_hi");
    assert_eq!(lines.len(), 3);
    assert_eq!(std::fs::read_to_string(&records).unwrap().lines().count(), 200);
}

#[test]
fn oracle_evaluates_a_tiny_instance() {
    let dir = tempfile::tempdir().unwrap();
    let cfg: streamx::codec::StreamingConfig =
        serde_json::from_str(r#"{"n": 1, "M": 2, "T": 1, "S": 1, "channel": "bsc:0.2", "input_dist": [0.5, 0.5], "master_seed": 1}"#)
            .unwrap();
    let inst = streamx::oracle::TinyInstance::from_config(cfg).unwrap();
    let path = dir.path().join("inst.json");
    std::fs::write(&path, serde_json::to_string(&inst).unwrap()).unwrap();
    let v = json(&streamx(&["oracle", "--instance", path.to_str().unwrap(), "--map"]));
    let full = v["map_full"][0].as_f64().unwrap();
    let window = v["map_window"][0].as_f64().unwrap();
    assert_eq!(full, window);
    assert!(full <= v["threshold"]["per_message"][0].as_f64().unwrap() + 1e-12);
}

#[test]
fn typicality_reports_coverage() {
    let v = json(&streamx(&[
        "typicality", "--v", "bsc:0.15", "--w", "bsc:0.1", "--length", "500", "--samples", "200",
    ]));
    assert_eq!(v["floor_violations"].as_u64(), Some(0));
}

#[test]
fn exit_codes_follow_the_error_class() {
    assert_eq!(streamx(&["info", "--channel", "bsc:1.5"]).status.code(), Some(2));
    assert_eq!(streamx(&["exponent", "--channel", "bsc:0.11", "--kind", "sp", "--rate", "-1"]).status.code(), Some(2));
    assert_eq!(streamx(&["simulate", "--config", "/nonexistent/cfg.json"]).status.code(), Some(4));
    assert_eq!(streamx(&["info"]).status.code(), Some(2));
}

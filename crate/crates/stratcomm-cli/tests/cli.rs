use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn stratcomm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_stratcomm")).args(args).output().expect("binary runs")
}

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("config.json");
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

const BINARY: &str = r#"{"source": ["3/10", "7/10"], "utility": [[0, 1], [-2, 0]], "slack": "1/5",
    "n_max": 4, "strategy": {"kind": "neighbour_classes", "index": 2}, "engine": "sequence,type"}"#;

#[test]
fn simulate_writes_csv_with_config_echo() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), BINARY);
    let out = stratcomm(&["simulate", "--config", &cfg]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    let echo = lines.next().unwrap().strip_prefix("# config: ").expect("echo line");
    let echoed: Value = serde_json::from_str(echo).unwrap();
    assert_eq!(echoed["slack"], "1/5");
    assert!(echoed.get("threads").is_none());
    assert_eq!(
        lines.next().unwrap(),
        "n,strategy_id,engine,recovered_prob_strategic,recovered_prob_cooperative,error_prob,rate_bits,image_rate_bits,recovered_prob_exact"
    );
    assert_eq!(lines.count(), 8);
    assert!(!text.contains('\r'));
}

#[test]
fn overrides_take_precedence_over_the_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), BINARY);
    let out = stratcomm(&["simulate", "--config", &cfg, "--engine", "type", "--n-min", "3", "--n-max", "3"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<&str> = text.lines().skip(2).collect();
    assert_eq!(rows, ["3,g2,type,0.441,0.784,0.559,0.528320833574,0.528320833574,441/1000"]);
}

#[test]
fn analyze_utility_emits_json() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{"source": ["1/2", "1/3", "1/6"], "utility": [[0, 1, 1], [-4, 0, 1], [-4, -4, 0]]}"#);
    let out_path = dir.path().join("analysis.json");
    let out = stratcomm(&["analyze-utility", "--config", &cfg, "--out", out_path.to_str().unwrap()]);
    assert!(out.status.success());
    let v: Value = serde_json::from_str(&fs::read_to_string(out_path).unwrap()).unwrap();
    assert_eq!(v["gamma"]["value"], "-2");
    assert_eq!(v["gamma_sign"]["label"], "negative");
}

#[test]
fn configuration_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{"source": ["1/2", "1/2"], "utility": [[0, 1], [-1, 0]], "colour": 3}"#);
    let out = stratcomm(&["simulate", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("colour"));

    let cfg = write_config(dir.path(), r#"{"source": ["1/2", "1/3"], "utility": [[0, 1], [-1, 0]]}"#);
    assert_eq!(stratcomm(&["simulate", "--config", &cfg]).status.code(), Some(2));
    assert_eq!(stratcomm(&["simulate"]).status.code(), Some(2));
    assert_eq!(stratcomm(&["verify", "no_such_suite"]).status.code(), Some(2));
    assert_eq!(stratcomm(&["example2", "--threads", "0"]).status.code(), Some(2));
}

#[test]
fn passing_suite_exits_with_zero() {
    let out = stratcomm(&["verify", "time_share"]);
    assert!(out.status.success());
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["passed"], true);
    assert!(String::from_utf8_lossy(&out.stderr).contains("PASS time_share/product_structure"));
}

#[test]
fn example3_failed_claim_exits_with_one() {
    let out = stratcomm(&["example3"]);
    assert_eq!(out.status.code(), Some(1));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["reconstructions"], "42840");
    assert_eq!(v["gap_block_length"], 48);
}

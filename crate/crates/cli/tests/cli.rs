//! End-to-end behaviour of the `ybip` binary: outputs, exit codes and
//! configuration handling.

use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn ybip(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ybip")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap()
}

fn bundled(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("configs").join(name)
}

#[test]
fn density_of_unit_b2() {
    let o = ybip(&["density", "--dist", "b2", "--a", "1", "--b", "1", "--x", "1"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "0.25\n");
}

#[test]
fn map_eval_of_fab() {
    let o = ybip(&["map-eval", "--map", "fab", "--alpha", "1", "--beta", "2", "--x", "1", "--y", "1"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "1.4 0.75\n");
}

#[test]
fn sample_emits_csv() {
    let args = ["sample", "--dist", "gb2", "--nu", "0.3", "--p", "1.5", "--q", "2.0", "--gamma", "2.0", "--n", "1000", "--seed", "7"];
    let o = ybip(&args);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "value");
    assert_eq!(lines.len(), 1001);
    assert!(lines[1..].iter().all(|l| l.parse::<f64>().unwrap() > 0.0));
    assert_eq!(ybip(&args).stdout, o.stdout);
}

#[test]
fn equal_fab_parameters_rejected() {
    let o = ybip(&["verify-maps", "--alpha", "2", "--beta", "2"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn corrupted_role_fails_factorization() {
    let o = ybip(&["verify-transforms", "--corrupt-lambda", "0.05"]);
    assert_eq!(o.status.code(), Some(1));
    let v = json(&o);
    assert_eq!(v["pass"], false);
    assert_eq!(v["report"]["checks"]["lindep"]["pass"], false);
    assert_eq!(v["report"]["checks"]["id1"]["pass"], true);
}

#[test]
fn grid_flag_restricts_points() {
    let o = ybip(&["verify-transforms", "--grid", "0,1"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert_eq!(v["report"]["points"], 8);
    assert_eq!(v["report"]["config"]["grid"], serde_json::json!([0.0, 1.0]));
}

#[test]
fn points_flag_scales_map_suite() {
    let o = ybip(&["verify-maps", "--points", "2500"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(json(&o)["report"]["checks"]["conservation_fab"]["count"], 2500);
}

#[test]
fn hde_cases_pass() {
    for alpha in ["2", "0.4", "1"] {
        let o = ybip(&["verify-hde", "--alpha", alpha]);
        assert_eq!(o.status.code(), Some(0), "alpha {alpha}");
    }
}

#[test]
fn bundled_configs_match_presets() {
    for (file, preset) in [
        ("fab.json", "fab"),
        ("fa_inf.json", "fa-inf"),
        ("fa_zero.json", "fa-zero"),
        ("gdelta.json", "gdelta"),
        ("dr.json", "dr"),
        ("negative_control.json", "negative-control"),
    ] {
        let from_preset = ybip(&["verify-ip", "--preset", preset, "--print-config"]);
        let from_file = ybip(&["verify-ip", "--config", bundled(file).to_str().unwrap(), "--print-config"]);
        assert_eq!(from_preset.status.code(), Some(0));
        assert_eq!(from_file.stdout, from_preset.stdout, "{file}");
        let on_disk: Value = serde_json::from_str(&std::fs::read_to_string(bundled(file)).unwrap()).unwrap();
        assert_eq!(on_disk, json(&from_preset), "{file}");
    }
}

#[test]
fn flags_override_file() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("maps.json");
    std::fs::write(&p, r#"{"schema": 1, "points": 300, "seed": 5}"#).unwrap();
    let o = ybip(&["verify-maps", "--config", p.to_str().unwrap(), "--seed", "9", "--print-config"]);
    let v = json(&o);
    assert_eq!(v["points"], 300);
    assert_eq!(v["seed"], 9);
}

#[test]
fn config_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.json");
    std::fs::write(&p, r#"{"schema": 1, "pionts": 300}"#).unwrap();
    assert_eq!(ybip(&["verify-maps", "--config", p.to_str().unwrap()]).status.code(), Some(2));
    std::fs::write(&p, r#"{"points": 300}"#).unwrap();
    assert_eq!(ybip(&["verify-maps", "--config", p.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(ybip(&["density", "--dist", "b2", "--nu", "1"]).status.code(), Some(2));
    assert_eq!(ybip(&["verify-ip", "--preset", "nope"]).status.code(), Some(2));
    assert_eq!(ybip(&["verify-ip", "--preset", "fa-zero", "--lambda", "-0.3"]).status.code(), Some(2));
    assert_eq!(ybip(&["verify-ip", "--n", "10"]).status.code(), Some(2));
    assert_eq!(ybip(&["no-such-command"]).status.code(), Some(2));
    let conflict = ybip(&["verify-ip", "--config", bundled("fab.json").to_str().unwrap(), "--lambda", "0.2"]);
    assert_eq!(conflict.status.code(), Some(2));
}

#[test]
fn csv_reports_append() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("runs.csv");
    let out = p.to_str().unwrap();
    for seed in ["1", "2"] {
        let o = ybip(&["verify-ip", "--n", "5000", "--ks-threshold", "0.05", "--seed", seed, "--format", "csv", "--out", out]);
        assert_eq!(o.status.code(), Some(0));
    }
    let text = std::fs::read_to_string(&p).unwrap();
    let mut r = csv::Reader::from_reader(text.as_bytes());
    assert_eq!(
        r.headers().unwrap().iter().collect::<Vec<_>>(),
        ["config_hash", "name", "map", "params", "n", "seed", "dcorr", "p_value", "ks_u", "ks_v", "pass"]
    );
    let rows: Vec<csv::StringRecord> = r.records().map(|x| x.unwrap()).collect();
    assert_eq!(rows.len(), 2);
    assert_ne!(&rows[0][0], &rows[1][0]);
}

#[test]
fn report_echoes_effective_config() {
    let o = ybip(&["verify-ip", "--preset", "fa-inf", "--n", "5000", "--seed", "3"]);
    let v = json(&o);
    assert_eq!(v["schema"], 1);
    assert_eq!(v["report"]["config"]["n"], 5000);
    assert_eq!(v["report"]["config"]["seed"], 3);
    assert_eq!(v["report"]["config"]["map"]["kind"], "fa-inf");
}

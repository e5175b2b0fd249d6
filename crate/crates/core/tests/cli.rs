use std::path::PathBuf;
use std::process::{Command, Output};

use kdlab::fragment::find_conv_gap_witness;
use kdlab::{parse_group, Operator};

fn kdlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kdlab")).args(args).output().expect("run kdlab")
}

fn write_tmp(name: &str, op: &Operator) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("kdlab-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let p = dir.join(name);
    std::fs::write(&p, serde_json::to_string(op).unwrap()).unwrap();
    p
}

#[test]
fn membership_exit_codes() {
    let z2 = parse_group("Z2").unwrap();
    let mixed = write_tmp("mixed.json", &Operator::maximally_mixed(&z2));
    let out = kdlab(&["member", "conv", "--state", mixed.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["verdict"], "inside");

    let klein = parse_group("Z2xZ2").unwrap();
    let w = find_conv_gap_witness(&klein, 0, 400).unwrap().witness.expect("gap on Z2xZ2");
    let outside = write_tmp("outside.json", &w.rho);
    let out = kdlab(&["member", "conv", "--state", outside.to_str().unwrap(), "--group", "Z2xZ2"]);
    assert_eq!(out.status.code(), Some(3));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["certificate"]["kind"], "separating");

    let out = kdlab(&["member", "conv", "--state", outside.to_str().unwrap(), "--tol-witness", "1", "--tol-membership", "1"]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn error_exit_codes() {
    assert_eq!(kdlab(&["group", "info", "--group", "Q8"]).status.code(), Some(1));
    assert_eq!(kdlab(&["kd", "compute", "--op", "/nonexistent.json"]).status.code(), Some(1));
    assert_eq!(kdlab(&["--help"]).status.code(), Some(0));

    let z4 = parse_group("Z4").unwrap();
    let op = write_tmp("z4.json", &Operator::maximally_mixed(&z4));
    let out = kdlab(&["charfn", "--op", op.to_str().unwrap(), "--order", "half"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(kdlab(&["kd", "compute", "--op", op.to_str().unwrap(), "--group", "Z2xZ2"]).status.code(), Some(1));
    assert_eq!(kdlab(&["group", "info", "--group", "Z4", "--format", "csv"]).status.code(), Some(1));
}

#[test]
fn csv_and_table_output() {
    let out = kdlab(&["group", "subgroups", "--group", "Z4", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 4);

    let out = kdlab(&["group", "info", "--group", "Z6", "--format", "table"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().any(|l| l.starts_with("kd_positive_pure_states") && l.ends_with("24")));
}

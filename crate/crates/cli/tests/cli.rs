use std::process::{Command, Output};

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_iwahori-gr"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn tmp(name: &str) -> std::path::PathBuf {
    std::env::temp_dir().join(format!("iwahori-gr-{}-{name}", std::process::id()))
}

#[test]
fn verify_is_deterministic() {
    let a = bin(&["verify", "--type", "A2", "--seed", "0"]);
    let b = bin(&["verify", "--type", "A2", "--seed", "0"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let v: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(v["datum"]["p"], 5);
    assert_eq!(v["summary"]["fail"], 0);
    for c in v["checks"].as_array().unwrap() {
        assert!(!c["anchor"].as_str().unwrap().is_empty());
    }
}

#[test]
fn inadmissible_exit_code() {
    assert_eq!(bin(&["verify", "--type", "A2", "--p", "3"]).status.code(), Some(2));
    assert_eq!(bin(&["verify", "--type", "G2", "--p", "5"]).status.code(), Some(2));
}

#[test]
fn gk_table() {
    let out = bin(&["gk", "--type", "B2", "--f", "1"]);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["bound"], 3);
    assert_eq!(v["expected"], 4);
    assert_eq!(v["conflict"], true);
}

#[test]
fn roots_info() {
    let out = bin(&["roots", "info", "B3"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["cartan"].as_array().unwrap().len(), 3);
}

#[test]
fn export_brackets_and_constants() {
    let path = tmp("brackets.json");
    let out = bin(&["export", "brackets", "--type", "A2", "--out", path.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v.as_array().unwrap().len(), 64);
    std::fs::remove_file(&path).ok();

    let path = tmp("g2.json");
    let out = bin(&["export", "constants", "--type", "G2", "--out", path.to_str().unwrap()]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    let max = v["constants"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["c"].as_i64().unwrap().abs())
        .max()
        .unwrap();
    assert_eq!(max, 3);
    std::fs::remove_file(&path).ok();
}

#[test]
fn export_bad_path_fails() {
    let out = bin(&["export", "constants", "--type", "A2", "--out", "/nonexistent-dir/x.json"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn group_cap_env_makes_quotient_checks_uncertified() {
    let out = Command::new(env!("CARGO_BIN_EXE_iwahori-gr"))
        .args(["verify", "--type", "A1", "--p", "5"])
        .env("IWAHORI_GROUP_CAP", "10")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v["summary"]["uncertified"].as_u64().unwrap() >= 1);
}

use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn hz(args: &[&str], cache: Option<&Path>) -> Output {
    let mut c = Command::new(env!("CARGO_BIN_EXE_hz"));
    c.args(args);
    match cache {
        Some(p) => c.env("HZ_CACHE_DIR", p),
        None => c.env_remove("HZ_CACHE_DIR"),
    };
    c.output().expect("hz runs")
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("stdout is JSON")
}

fn basis_file(dir: &Path) -> String {
    let path = dir.join("basis.json");
    let o = hz(&["basis", "--D", "5", "--k", "4", "--max-pole", "6/5", "--out", path.to_str().unwrap()], None);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    path.to_str().unwrap().to_string()
}

#[test]
fn lattice_reports_gram_and_discriminant() {
    let o = hz(&["lattice", "--D", "5"], None);
    assert!(o.status.success());
    let v = json(&o);
    assert_eq!(v["result"]["discriminant_order"], 5);
    assert_eq!(v["manifest"]["command"], "lattice");
    assert!(String::from_utf8_lossy(&o.stderr).contains("|L'/L| = 5"));
}

#[test]
fn bad_input_exits_with_precondition_code() {
    let o = hz(&["lattice", "--D", "7"], None);
    assert_eq!(o.status.code(), Some(2));
    assert!(o.stdout.is_empty());
}

#[test]
fn strict_mode_refuses_flagged_traces() {
    let dir = tempfile::tempdir().unwrap();
    let f = basis_file(dir.path());
    let out = dir.path().join("t.json");
    let o = hz(&["trace", "--D", "5", "--X", "-3,-3,0,1", "--f", &f, "--index", "3", "--height", "1", "--strict", "--out", out.to_str().unwrap()], None);
    assert_eq!(o.status.code(), Some(3));
    assert!(!out.exists());
    let o = hz(&["trace", "--D", "5", "--X", "-3,-3,0,1", "--f", &f, "--index", "3", "--height", "1"], None);
    assert!(o.status.success());
    assert!(!json(&o)["result"]["flags"].as_array().unwrap().is_empty());
}

#[test]
fn trace_results_are_reproducible_and_exact() {
    let dir = tempfile::tempdir().unwrap();
    let f = basis_file(dir.path());
    let args = ["trace", "--D", "5", "--k", "4", "--X", "-3,-3,0,1", "--f", &f, "--index", "3", "--strict"];
    let (a, b) = (hz(&args, None), hz(&args, None));
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, b.stdout);
    let v = json(&a);
    assert_eq!(v["result"]["value"], "0");
    assert_eq!(v["result"]["convention"], "trace = value * pi * i");
    assert_eq!(v["manifest"]["flags"]["strict"], true);
    let o = hz(&["trace", "--D", "5", "--k", "6", "--X", "-3,-3,0,1", "--f", &f, "--index", "3"], None);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn intersecting_cycles_exit_with_precondition_code() {
    let dir = tempfile::tempdir().unwrap();
    let f = basis_file(dir.path());
    let o = hz(&["trace", "--D", "5", "--X", "1,1,0,0", "--f", &f, "--index", "3"], None);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("cycles intersect"));
}

#[test]
fn basis_cache_gives_identical_output() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("cache");
    let out = dir.path().join("b.json");
    let args = ["basis", "--D", "5", "--max-pole", "1", "--ceiling", "8", "--out", out.to_str().unwrap()];
    assert!(hz(&args, Some(&cache)).status.success());
    let first = std::fs::read(&out).unwrap();
    assert_eq!(std::fs::read_dir(cache.join("v1")).unwrap().count(), 1);
    assert!(hz(&args, Some(&cache)).status.success());
    assert_eq!(first, std::fs::read(&out).unwrap());
    assert!(hz(&args, None).status.success());
    assert_eq!(first, std::fs::read(&out).unwrap());
}

#[test]
fn theta_preimage_is_certified() {
    let o = hz(&["theta", "preimage", "--M", "4"], None);
    assert!(o.status.success());
    assert_eq!(json(&o)["result"]["certificate"]["pass"], true);
    let o = hz(&["theta", "preimage", "--M", "11"], None);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn verify_core_suite_passes() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("report.json");
    let o = hz(&["verify", "--suite", "core", "--D", "5", "--k", "4", "--report", report.to_str().unwrap()], None);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: Value = serde_json::from_slice(&std::fs::read(&report).unwrap()).unwrap();
    assert_eq!(v["result"]["pass"], true);
}

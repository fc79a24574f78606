mod common;

use common::{ait, invocations, DATA};
use serde_json::Value;

fn args(s: &[&str]) -> Vec<String> {
    s.iter().map(|a| a.to_string()).collect()
}

fn json_line(out: &std::process::Output) -> Value {
    let text = String::from_utf8(out.stdout.clone()).unwrap();
    serde_json::from_str(text.lines().next().unwrap()).unwrap()
}

#[test]
fn k_reports_value_and_witness() {
    let cache = tempfile::tempdir().unwrap();
    let out = ait(cache.path(), &args(&["k", "0101"]));
    assert!(out.status.success());
    let v = json_line(&out);
    assert_eq!(v["input"]["x"], "0101");
    assert_eq!(v["value"], 10);
    let w = v["witness"].as_str().unwrap().to_string();
    assert_eq!(w.len(), 10);
    let run = json_line(&ait(cache.path(), &args(&["machine", "run", &w])));
    assert_eq!(run["value"]["Halted"]["output"], "0101");
    assert_eq!(run["value"]["Halted"]["bits_read"], 10);
}

#[test]
fn empty_string_spellings() {
    let cache = tempfile::tempdir().unwrap();
    let a = json_line(&ait(cache.path(), &args(&["k", "ε"])));
    let b = json_line(&ait(cache.path(), &args(&["k", "-"])));
    assert_eq!(a, b);
    assert_eq!(a["value"], 2);
}

#[test]
fn usage_and_input_errors_exit_2() {
    let cache = tempfile::tempdir().unwrap();
    for bad in [
        args(&["k"]),
        args(&["frobnicate"]),
        args(&["k", "012"]),
        args(&["mset", "/nonexistent/file"]),
        args(&["experiment", "nope"]),
        args(&["stoch", "0", "--scoring", "2k"]),
        args(&["--max-len", "0", "k", "0"]),
        args(&["nu", "apply", &format!("{DATA}/uniform3.tsv"), "0110101"]),
    ] {
        let out = ait(cache.path(), &bad);
        assert_eq!(out.status.code(), Some(2), "{bad:?}");
        assert!(!out.stderr.is_empty());
    }
}

#[test]
fn experiments_pass() {
    let cache = tempfile::tempdir().unwrap();
    let out = ait(cache.path(), &args(&["experiment", "all"]));
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let asserts = text
        .lines()
        .map(|l| serde_json::from_str::<Value>(l).unwrap())
        .filter(|v| v["kind"] == "assert")
        .count();
    assert!(asserts > 100);
}

#[test]
fn experiment_writes_report_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("coding.jsonl");
    let out = ait(dir.path(), &args(&["experiment", "coding", "--out", path.to_str().unwrap()]));
    assert!(out.status.success());
    assert_eq!(std::fs::read(&path).unwrap(), out.stdout);
}

#[test]
fn every_command_is_deterministic() {
    let cache = tempfile::tempdir().unwrap();
    for inv in invocations() {
        let first = ait(cache.path(), &inv);
        let second = ait(cache.path(), &inv);
        assert_eq!(first.status.code(), Some(0), "{inv:?}: {}", String::from_utf8_lossy(&first.stderr));
        assert_eq!(first.stdout, second.stdout, "{inv:?}");
    }
}

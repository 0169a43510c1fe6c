use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_linf-fixpoint"))
}

fn root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn fixture(rel: &str) -> String {
    root().join("fixtures").join(rel).to_string_lossy().into_owned()
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("bad JSON ({e}): {}", String::from_utf8_lossy(&out.stdout)))
}

fn schema() -> jsonschema::Validator {
    let text = std::fs::read_to_string(root().join("schemas/report.schema.json")).unwrap();
    jsonschema::validator_for(&serde_json::from_str(&text).unwrap()).unwrap()
}

fn assert_valid(report: &Value) {
    let v = schema();
    let errors: Vec<String> = v.iter_errors(report).map(|e| e.to_string()).collect();
    assert!(errors.is_empty(), "schema violations: {errors:?}");
}

fn queries(report: &Value) -> u64 {
    report["queries"].as_u64().unwrap()
}

#[test]
fn banach_on_half_fixture() {
    let out = run(&["solve", "--method", "banach", "--epsilon", "0.01", "--instance", &fixture("instances/d1-half.json")]);
    assert!(out.status.success());
    let r = stdout_json(&out);
    assert_valid(&r);
    assert_eq!(r["succeeded"], true);
    assert_eq!(r["instance"], "d1-half");
}

#[test]
fn centerpoint_beats_banach_on_reflection() {
    let f = fixture("instances/d1-reflection-099.json");
    let b = stdout_json(&run(&["solve", "--method", "banach", "--epsilon", "0.01", "--instance", &f, "--trace", "none"]));
    let c = stdout_json(&run(&["solve", "--method", "centerpoint", "--epsilon", "0.01", "--instance", &f]));
    assert_valid(&b);
    assert_valid(&c);
    assert!(queries(&c) < queries(&b), "centerpoint {} vs banach {}", queries(&c), queries(&b));
}

#[test]
fn every_method_on_every_fixture() {
    for name in ["d1-half.json", "d2-affine.json", "toygame.json"] {
        for method in ["banach", "centerpoint", "decomposed"] {
            let out = run(&["solve", "--method", method, "--epsilon", "1/10", "--instance", &fixture(&format!("instances/{name}"))]);
            let r = stdout_json(&out);
            assert!(out.status.success(), "{name} {method}: {r}");
            assert_valid(&r);
        }
    }
}

#[test]
fn unknown_method_exits_two_with_error_json() {
    let out = run(&["solve", "--method", "newton", "--epsilon", "0.01", "--instance", &fixture("instances/d1-half.json")]);
    assert_eq!(out.status.code(), Some(2));
    let e = stdout_json(&out);
    assert_eq!(e["error"]["kind"], "usage");
    assert!(e["error"]["message"].as_str().unwrap().contains("newton"));
}

#[test]
fn solver_and_input_errors_are_json() {
    let out = run(&["solve", "--epsilon", "0.01", "--instance", "/nonexistent.json"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(stdout_json(&out)["error"]["kind"], "instance");
    let out = run(&["solve", "--epsilon", "-1", "--instance", &fixture("instances/d1-half.json")]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn json_out_and_csv_append() {
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("r.json");
    let csv = dir.path().join("r.csv");
    for _ in 0..2 {
        let out = bin()
            .args(["solve", "--epsilon", "0.01", "--instance", &fixture("instances/d2-affine.json")])
            .arg("--json-out")
            .arg(&json)
            .arg("--csv")
            .arg(&csv)
            .output()
            .unwrap();
        assert!(out.status.success());
        assert!(out.stdout.is_empty());
    }
    assert_valid(&serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap());
    let text = std::fs::read_to_string(&csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "method,d,lambda,epsilon,queries,residual,iterations,wall_ms");
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("centerpoint,2,3/4,1/100,"));
}

#[test]
fn verify_cube_center_and_corner() {
    let cube = fixture("spaces/cube-d2.json");
    let ok = run(&["verify-centerpoint", "--space", &cube, "--point", "0.5,0.5", "--alpha", "0.5"]);
    assert!(ok.status.success());
    assert_eq!(stdout_json(&ok)["certified"], true);
    let bad = run(&["verify-centerpoint", "--space", &cube, "--point", "0,0", "--alpha", "0.25"]);
    assert_eq!(bad.status.code(), Some(1));
    let v = stdout_json(&bad);
    assert_eq!(v["worst_direction"], serde_json::json!([-1, -1]));
    assert_eq!(v["worst_volume"]["exact"], "0");
}

#[test]
fn verify_dimension_guard() {
    let space = r#"{"d": 9}"#;
    let out = run(&["verify-centerpoint", "--space", space, "--point", "0,0,0,0,0,0,0,0,0"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(stdout_json(&out)["error"]["kind"], "verify");
}

#[test]
fn replayed_centerpoints_are_certified() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("r.json");
    let out = bin()
        .args(["solve", "--epsilon", "0.01", "--instance", "random:2:0.9", "--seed", "11", "--trace", "full"])
        .arg("--json-out")
        .arg(&report)
        .output()
        .unwrap();
    assert!(out.status.success());
    let out = bin().arg("verify-centerpoint").arg("--replay").arg(&report).output().unwrap();
    let v = stdout_json(&out);
    assert!(out.status.success(), "{v}");
    assert!(v["queries"].as_array().unwrap().len() >= 2);
}

fn volume_lines(out: &Output) -> Vec<String> {
    String::from_utf8_lossy(&out.stdout).lines().map(str::to_string).collect()
}

#[test]
fn volume_examples() {
    let cube = fixture("spaces/cube-d2.json");
    let out = run(&["volume", "--space", &cube, "--pyramid", r#"{"axis": 0, "sign": -1, "apex": [1, 1]}"#]);
    assert!(out.status.success());
    assert_eq!(volume_lines(&out)[0], "exact 1/2");

    let removed = r#"{"d": 2, "cuts": [{"axis": 0, "sign": -1, "apex": ["1/2", "1/2"]}]}"#;
    let out = run(&["volume", "--space", removed, "--pyramid", r#"{"axis": 0, "sign": -1, "apex": ["1/2", "1/2"]}"#]);
    assert_eq!(volume_lines(&out)[0], "exact 0");
}

#[test]
fn volume_matches_monte_carlo() {
    let out = run(&["volume", "--space", &fixture("spaces/two-cuts-d2.json"), "--mc-samples", "100000", "--seed", "3"]);
    assert!(out.status.success());
    let lines = volume_lines(&out);
    let exact: f64 = {
        let t = lines[0].strip_prefix("exact ").unwrap();
        let (p, q) = t.split_once('/').unwrap();
        p.parse::<f64>().unwrap() / q.parse::<f64>().unwrap()
    };
    let parts: Vec<&str> = lines[2].split_whitespace().collect();
    assert_eq!(parts[0], "mc");
    let est: f64 = parts[1].parse().unwrap();
    let se: f64 = parts[3].parse().unwrap();
    assert!((est - exact).abs() <= 4.0 * se, "{est} vs {exact} (se {se})");
}

#[test]
fn volume_arrangement_dump() {
    let dir = tempfile::tempdir().unwrap();
    let dump = dir.path().join("arr.json");
    let out = bin()
        .args(["volume", "--space", &fixture("spaces/two-cuts-d2.json"), "--dump-arrangement"])
        .arg(&dump)
        .output()
        .unwrap();
    assert!(out.status.success());
    let a: Value = serde_json::from_str(&std::fs::read_to_string(&dump).unwrap()).unwrap();
    assert_eq!(a["total_volume"], "1");
    assert!(!a["cells"].as_array().unwrap().is_empty());
}

#[test]
fn malformed_space_is_rejected() {
    let out = run(&["volume", "--space", r#"{"d": 2, "cuts": [{"axis": 5}]}"#]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(stdout_json(&out)["error"]["kind"], "input");
}

#[test]
fn benchmark_empty_and_default() {
    let out = run(&["benchmark", "--matrix", &fixture("bench/empty.json")]);
    assert!(out.status.success());
    assert_eq!(String::from_utf8_lossy(&out.stdout), "method,d,lambda,epsilon,queries,residual,iterations,wall_ms\n");

    let matrix = r#"{"seed": 2, "cells": [
        {"d": 1, "lambda": "0.9", "epsilon": "0.01", "method": "banach", "instance": "reflection"},
        {"d": 1, "lambda": "0.9", "epsilon": "0.01", "method": "centerpoint"},
        {"d": 2, "lambda": "0.5", "epsilon": "0.25", "method": "decomposed"}
    ]}"#;
    let a = run(&["benchmark", "--matrix", matrix, "--trace", "none"]);
    let b = run(&["benchmark", "--matrix", matrix, "--trace", "none", "--no-cache"]);
    assert!(a.status.success() && b.status.success());
    let strip = |o: &Output| -> Vec<String> {
        String::from_utf8_lossy(&o.stdout).lines().map(|l| l.rsplit_once(',').unwrap().0.to_string()).collect()
    };
    // Identical apart from wall time.
    assert_eq!(strip(&a), strip(&b));
    assert_eq!(strip(&a).len(), 4);
}

#[test]
fn benchmark_rejects_bad_matrix() {
    let out = run(&["benchmark", "--matrix", r#"{"cells": [{"d": 1, "lambda": "1", "epsilon": "0.1", "method": "banach"}]}"#]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(stdout_json(&out)["error"]["kind"], "input");
}

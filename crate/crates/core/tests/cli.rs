use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn ergolab(args: &[&str], out_dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ergolab"))
        .args(args)
        .env("LAB_OUTPUT_DIR", out_dir)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, body: &str) -> String {
    let p = dir.join("config.json");
    fs::write(&p, body).unwrap();
    p.to_string_lossy().into_owned()
}

fn summary(dir: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join("summary.json")).unwrap()).unwrap()
}

#[test]
fn run_writes_csv_and_summary_to_env_dir() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let cfg = write_config(
        tmp.path(),
        r#"{
  "experiment": "levelset",
  "function": "power:0.5",
  "parameters": { "seq": "prefix:10", "lambda": 3.0, "grid_cells": 20000 },
  "output_dir": "ignored-because-env-wins"
}"#,
    );
    let o = ergolab(&["run", &cfg], &out);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(out.join("levelset.csv")).unwrap();
    assert!(csv.starts_with("index,start,length\n"));
    let s = summary(&out);
    assert_eq!(s["status"], "ok");
    assert_eq!(s["config"]["parameters"]["tol"], 1e-10);
    assert_eq!(s["result"]["weak_bound"]["holds"], true);
    assert!(s["wall_time_s"].as_f64().unwrap() >= 0.0);
    assert!(!Path::new("ignored-because-env-wins").exists());
}

#[test]
fn construct_writes_sequence_file() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), r#"{"experiment": "construct", "parameters": {"K": 17, "seed": 3}}"#);
    let o = ergolab(&["run", &cfg], tmp.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(tmp.path().join("construct_sequence.txt")).unwrap();
    let seq: ergolab::blockseq::PerturbedBlockSequence = text.trim().parse().unwrap();
    assert_eq!(seq.stages(), 2);
    let rows = fs::read_to_string(tmp.path().join("construct.csv")).unwrap();
    assert_eq!(rows.lines().count(), 3);
    assert_eq!(summary(tmp.path())["seed"], 3);
}

#[test]
fn validation_failure_exits_2_with_line() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "{\n  \"experiment\": \"levelset\",\n  \"parameters\": {\n    \"lambda\": 0\n  }\n}\n",
    );
    for cmd in ["validate", "run"] {
        let o = ergolab(&[cmd, &cfg], tmp.path());
        assert_eq!(o.status.code(), Some(2));
        let err = String::from_utf8_lossy(&o.stderr);
        assert!(err.contains("line 4: parameters.lambda"), "{err}");
        assert!(err.contains("precondition lambda > 0"), "{err}");
    }
    assert!(!tmp.path().join("summary.json").exists());
}

#[test]
fn computation_failure_exits_3_and_names_error() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        r#"{"experiment": "witness", "parameters": {"lambda": 2, "max_scan": 10}}"#,
    );
    let o = ergolab(&["run", &cfg], tmp.path());
    assert_eq!(o.status.code(), Some(3));
    let s = summary(tmp.path());
    assert_eq!(s["status"], "error");
    assert_eq!(s["error"]["name"], "EntryTimeBudgetExceeded");
}

#[test]
fn list_experiments_names_all() {
    let tmp = tempfile::tempdir().unwrap();
    let o = ergolab(&["list-experiments"], tmp.path());
    assert!(o.status.success());
    let text = String::from_utf8_lossy(&o.stdout);
    for e in ergolab::cli::Experiment::ALL {
        assert!(text.lines().any(|l| l.starts_with(e.name())), "missing {e}");
    }
}

#[test]
fn shipped_configs_validate() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/configs");
    let mut seen = 0;
    for entry in fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        let text = fs::read_to_string(&path).unwrap();
        ergolab::cli::validate(&text).unwrap_or_else(|e| panic!("{}: {:?}", path.display(), e));
        seen += 1;
    }
    assert_eq!(seen, ergolab::cli::Experiment::ALL.len());
}

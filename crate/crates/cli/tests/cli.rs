use std::fs;
use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpStream;
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};

use tempfile::TempDir;

const QUICK: &str = r#"{"evaluation": {"repeats": 2, "outer_k": 3, "inner_k": 3,
  "grid": {"elastic_net": {"alpha": [1.0], "c": [1.0]},
           "random_forest": {"max_depth": [3], "max_features": [5]},
           "svm": {"kernel": ["linear"], "c": [1.0], "gamma": [0.01]}},
  "fit": {"n_trees": 20}}}"#;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_inkscreen"))
}

fn run(args: &[&str], dir: &Path) -> Output {
    bin().args(args).current_dir(dir).output().unwrap()
}

fn ok(args: &[&str], dir: &Path) -> Output {
    let out = run(args, dir);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    out
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// A 24-session cohort with features and a quick config.
fn workspace() -> TempDir {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("quick.json"), QUICK).unwrap();
    ok(&["--seed", "5", "synth", "--groups", "8,8,8", "--out-dir", "cohort"], dir.path());
    ok(&["extract", "cohort", "-o", "features.csv"], dir.path());
    dir
}

#[test]
fn synth_extract_evaluate_train_predict() {
    let dir = workspace();
    let d = dir.path();
    let sessions = fs::read_dir(d.join("cohort")).unwrap().count();
    assert_eq!(sessions, 25, "24 sessions plus labels.csv");
    let csv = fs::read_to_string(d.join("features.csv")).unwrap();
    assert_eq!(csv.lines().count(), 25);
    assert_eq!(csv.lines().next().unwrap().split(',').count(), 191);

    let eval = |seed: &str| {
        let args = [
            "--config", "quick.json", "--seed", seed, "evaluate", "--features", "features.csv", "--labels",
            "cohort/labels.csv", "--target", "diagnosis",
        ];
        ok(&args, d).stdout
    };
    let a = eval("1");
    assert_eq!(a, eval("1"), "same seed, same report");
    let report: serde_json::Value = serde_json::from_slice(&a).unwrap();
    assert_eq!(report["n_samples"], 24);
    assert!(report["summary"]["auc"]["mean"].as_f64().unwrap() > 0.8);

    for target in ["cn_vs_dementia", "mmse", "mtl"] {
        let args = [
            "--config", "quick.json", "evaluate", "--features", "features.csv", "--labels", "cohort/labels.csv",
            "--target", target,
        ];
        ok(&args, d);
    }

    let train = |out: &str| {
        let args = [
            "--config", "quick.json", "--seed", "2", "train", "--features", "features.csv", "--labels",
            "cohort/labels.csv", "-o", out, "--created-at", "2026-03-01T12:00:00Z",
        ];
        ok(&args, d);
        fs::read(d.join(out)).unwrap()
    };
    assert_eq!(train("b1.json"), train("b2.json"), "bundles are byte-identical");

    let from_sessions = ok(&["predict", "--bundle", "b1.json", "cohort"], d).stdout;
    let from_csv = ok(&["predict", "--bundle", "b1.json", "--features", "features.csv"], d).stdout;
    assert_eq!(from_sessions, from_csv);
    let preds: serde_json::Value = serde_json::from_slice(&from_csv).unwrap();
    let preds = preds.as_array().unwrap();
    assert_eq!(preds.len(), 24);
    for p in preds {
        let total: f64 = p["probabilities"].as_object().unwrap().values().map(|v| v.as_f64().unwrap()).sum();
        assert!((total - 1.0).abs() <= 1e-9);
        let mmse = p["mmse"].as_f64().unwrap();
        assert!((0.0..=30.0).contains(&mmse));
    }
}

#[test]
fn train_with_cv_records_metrics() {
    let dir = workspace();
    let args = [
        "--config", "quick.json", "train", "--features", "features.csv", "--labels", "cohort/labels.csv", "-o",
        "b.json", "--with-cv",
    ];
    ok(&args, dir.path());
    let b: serde_json::Value = serde_json::from_slice(&fs::read(dir.path().join("b.json")).unwrap()).unwrap();
    let cv = &b["metadata"]["cv_metrics"];
    for (target, metric) in [("diagnosis", "auc"), ("mmse", "r2"), ("mtl", "r2")] {
        assert!(cv[target][metric].is_f64(), "{target} {metric}: {cv}");
    }
    assert!(b["metadata"]["created_at"].as_str().unwrap().ends_with('Z'));
}

#[test]
fn permtest_writes_a_report() {
    let dir = workspace();
    let args = [
        "--config", "quick.json", "permtest", "--features", "features.csv", "--labels", "cohort/labels.csv",
        "--target", "cn_vs_dementia", "--n-perm", "3", "-o", "perm.json",
    ];
    ok(&args, dir.path());
    let r: serde_json::Value = serde_json::from_slice(&fs::read(dir.path().join("perm.json")).unwrap()).unwrap();
    assert_eq!(r["null"].as_array().unwrap().len(), 3);
    let p = r["p_value"].as_f64().unwrap();
    assert!((0.25..=1.0).contains(&p), "{p}");
}

#[test]
fn extract_keeps_good_rows_when_some_files_fail() {
    let dir = workspace();
    let d = dir.path();
    fs::write(d.join("cohort/broken.json"), "{").unwrap();
    fs::write(d.join("cohort/empty.json"), r#"{"session_id": "e", "tasks": []}"#).unwrap();
    let out = run(&["extract", "cohort", "-o", "partial.csv"], d);
    assert!(!out.status.success());
    let err = stderr(&out);
    assert!(err.contains("broken.json") && err.contains("empty.json"), "{err}");
    let csv = fs::read_to_string(d.join("partial.csv")).unwrap();
    assert_eq!(csv.lines().count(), 25);

    fs::create_dir(d.join("nothing")).unwrap();
    let out = run(&["extract", "nothing"], d);
    assert!(!out.status.success());
    assert!(stderr(&out).contains("no sessions found"));
}

#[test]
fn mismatched_ids_and_bundles_are_rejected() {
    let dir = workspace();
    let d = dir.path();
    let labels = fs::read_to_string(d.join("cohort/labels.csv")).unwrap();
    let fewer: Vec<&str> = labels.lines().take(20).collect();
    fs::write(d.join("fewer.csv"), fewer.join("\n") + "\n").unwrap();
    let out = run(
        &["evaluate", "--features", "features.csv", "--labels", "fewer.csv", "--target", "mmse"],
        d,
    );
    assert!(!out.status.success());
    assert!(stderr(&out).contains("feature and label ids differ"), "{}", stderr(&out));

    let args = [
        "--config", "quick.json", "train", "--features", "features.csv", "--labels", "cohort/labels.csv", "-o",
        "b.json",
    ];
    ok(&args, d);
    let good = fs::read_to_string(d.join("b.json")).unwrap();
    let mut v: serde_json::Value = serde_json::from_str(&good).unwrap();
    v["format_version"] = 2.into();
    fs::write(d.join("v2.json"), v.to_string()).unwrap();
    let out = run(&["predict", "--bundle", "v2.json", "--features", "features.csv"], d);
    assert!(!out.status.success());
    assert!(stderr(&out).contains("format version 2"), "{}", stderr(&out));

    let mut v: serde_json::Value = serde_json::from_str(&good).unwrap();
    v["registry_hash"] = "0000".into();
    fs::write(d.join("other.json"), v.to_string()).unwrap();
    let out = run(&["predict", "--bundle", "other.json", "cohort"], d);
    assert!(!out.status.success());
    assert!(stderr(&out).contains("feature registry"), "{}", stderr(&out));
}

#[test]
fn synth_options() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(&["synth", "-n", "3", "--theta", "0.7", "--out-dir", "fixed"], d);
    ok(&["synth", "-n", "2", "--uniform", "0.2,0.4", "--out-dir", "uni"], d);
    fs::write(d.join("spec.json"), r#"{"sampling_hz": 100}"#).unwrap();
    fs::write(d.join("dist.json"), r#"{"kind": "fixed", "theta": 0.0}"#).unwrap();
    ok(&["synth", "-n", "1", "--theta-dist", "dist.json", "--spec", "spec.json", "--out-dir", "spec"], d);
    assert_eq!(fs::read_dir(d.join("fixed")).unwrap().count(), 4);
    assert!(!run(&["synth", "--groups", "1,2", "--out-dir", "x"], d).status.success());
    assert!(!run(&["synth", "--theta", "0.5", "--out-dir", "x"], d).status.success());
    assert!(!run(&["synth", "-n", "1", "--theta", "0.5", "--uniform", "0,1", "--out-dir", "x"], d).status.success());
    assert!(!run(&["--config", "missing.json", "synth", "-n", "1", "--out-dir", "x"], d).status.success());
}

fn http_get(addr: &str, path: &str) -> String {
    let mut s = TcpStream::connect(addr).unwrap();
    write!(s, "GET {path} HTTP/1.1\r\nHost: {addr}\r\nConnection: close\r\n\r\n").unwrap();
    let mut out = String::new();
    s.read_to_string(&mut out).unwrap();
    out
}

#[test]
fn serve_answers_over_tcp() {
    let dir = tempfile::tempdir().unwrap();
    let store: PathBuf = dir.path().join("store");
    let mut child = bin()
        .args(["serve", "--addr", "127.0.0.1:0", "--store-dir"])
        .arg(&store)
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    let mut lines = BufReader::new(child.stderr.take().unwrap()).lines();
    let addr = loop {
        let line = lines.next().expect("server exited").unwrap();
        if let Some(rest) = line.strip_prefix("listening on http://") {
            break rest.to_string();
        }
    };
    let tasks = http_get(&addr, "/api/v1/tasks");
    let missing = http_get(&addr, "/api/v1/sessions/0123456789abcdef/screening");
    child.kill().unwrap();
    child.wait().unwrap();
    assert!(tasks.starts_with("HTTP/1.1 200"), "{tasks}");
    assert!(tasks.contains("TMT_A"));
    assert!(missing.starts_with("HTTP/1.1 503"), "{missing}");
    assert!(store.is_dir());
}

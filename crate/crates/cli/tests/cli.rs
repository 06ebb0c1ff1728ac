use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const MANIFEST: &str = r#"
[dataset]
source = "synthetic"
kind = { name = "blobs", classes = 3 }
n = 90
noise = 0.8
split = [24, 16, 50]

[graph]
variant = "full"

[model]
kind = "sgc"
k_layers = 2
epochs = 40
learning_rate = 0.2

[experiment]
runs = 2
seed = 4
"#;

fn pagraph(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pagraph"))
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .unwrap()
}

fn write_manifest(dir: &Path, text: &str) -> PathBuf {
    let path = dir.join("m.toml");
    fs::write(&path, text).unwrap();
    path
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn train_writes_predictions_and_checkpoint() {
    let dir = tempfile::tempdir().unwrap();
    let m = write_manifest(dir.path(), MANIFEST);
    let out = dir.path().join("out");
    let o = pagraph(&["train", "-m", s(&m), "-o", s(&out), "--model", "gcn"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let stdout = String::from_utf8(o.stdout).unwrap();
    assert!(stdout.contains("test accuracy"));
    let preds = fs::read_to_string(out.join("predictions.csv")).unwrap();
    assert_eq!(preds.lines().count(), 91);
    assert!(out.join("model.ckpt").is_file());
    assert!(out.join("loss_curve.csv").is_file());
}

#[test]
fn build_graph_then_compare_against_it() {
    let dir = tempfile::tempdir().unwrap();
    let m = write_manifest(dir.path(), &MANIFEST.replace("\"full\"", "\"knn\""));
    let out = dir.path().join("graph");
    let o = pagraph(&["build-graph", "-m", s(&m), "-o", s(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let edges = out.join("edges.txt");
    assert!(edges.is_file());

    let cmp = dir.path().join("cmp");
    let o = pagraph(&[
        "compare-adjacency",
        "-m",
        s(&m),
        "-o",
        s(&cmp),
        "--ground-truth",
        s(&edges),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let knn = fs::read_to_string(cmp.join("cells/compare_adjacency_knn.csv")).unwrap();
    // The knn graph matches itself exactly: fn = fp = 0 on every run.
    let header: Vec<&str> = knn.lines().next().unwrap().split(',').collect();
    let col = |name: &str| header.iter().position(|h| *h == name).unwrap();
    for line in knn.lines().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        assert_eq!(f[col("fn")], "0");
        assert_eq!(f[col("fp")], "0");
    }
}

#[test]
fn sweep_overrides_axis_and_values() {
    let dir = tempfile::tempdir().unwrap();
    let m = write_manifest(dir.path(), MANIFEST);
    let out = dir.path().join("sweep");
    let o = pagraph(&[
        "sweep",
        "-m",
        s(&m),
        "-o",
        s(&out),
        "--axis",
        "smoothing",
        "--values",
        "1,3",
        "--runs",
        "1",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(out.join("cells/smoothing_k1.csv").is_file());
    assert!(out.join("cells/smoothing_k3.csv").is_file());
    assert!(out.join("smoothing.svg").is_file());
}

#[test]
fn baseline_and_ablation_run() {
    let dir = tempfile::tempdir().unwrap();
    let m = write_manifest(dir.path(), MANIFEST);
    let o = pagraph(&[
        "baseline-knn",
        "-m",
        s(&m),
        "-o",
        s(&dir.path().join("b")),
        "-k",
        "3",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let o = pagraph(&["ablation", "-m", s(&m), "-o", s(&dir.path().join("a"))]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let agg = fs::read_to_string(dir.path().join("a/aggregate.csv")).unwrap();
    for v in ["full", "intrinsic_only", "pa_minus_penalty", "pa_only"] {
        assert!(agg.contains(v), "{v} missing from {agg}");
    }
}

#[test]
fn exit_codes_follow_error_category() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x");

    let missing = dir.path().join("absent.toml");
    let o = pagraph(&["train", "-m", s(&missing), "-o", s(&out)]);
    assert_eq!(o.status.code(), Some(5));

    let bad = write_manifest(dir.path(), "[dataset\nsource = ");
    let o = pagraph(&["train", "-m", s(&bad), "-o", s(&out)]);
    assert_eq!(o.status.code(), Some(2));

    fs::write(dir.path().join("d.csv"), "x,y,label\n1,2,a\n3,oops,b\n").unwrap();
    let csv = write_manifest(
        dir.path(),
        "[dataset]\nsource = \"csv\"\npath = \"d.csv\"\nsplit = [1, 0, 1]\n",
    );
    let o = pagraph(&["train", "-m", s(&csv), "-o", s(&out)]);
    assert_eq!(o.status.code(), Some(3));

    let infeasible = write_manifest(
        dir.path(),
        &MANIFEST.replace("[24, 16, 50]", "[80, 16, 50]"),
    );
    let o = pagraph(&["ablation", "-m", s(&infeasible), "-o", s(&out)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!out.exists());
}

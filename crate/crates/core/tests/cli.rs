mod common;

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use common::*;
use gpmal::cli::Model;
use rand::{Rng, SeedableRng};

fn gpmal(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gpmal"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn train_small(out: &Path, extra: &[&str]) -> Output {
    let wine = wine_path();
    let mut args = vec![
        "train", "--data", p(&wine), "--label", "class", "--pop", "24", "--generations", "3",
        "--seed", "5", "--out", p(out),
    ];
    args.extend_from_slice(extra);
    gpmal(&args)
}

#[test]
fn train_writes_all_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let o = train_small(&out, &["--fold", "--dump-neighbors"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let model = Model::load(&out.join("model.txt")).unwrap();
    assert_eq!(model.individual.t(), 2);
    assert_eq!(model.manifest.dataset.n, 178);
    assert!(fs::read_to_string(out.join("model.txt")).unwrap().starts_with("# gpmal-model/1\n# {"));
    let emb = fs::read_to_string(out.join("embedding.csv")).unwrap();
    assert_eq!(emb.lines().count(), 179);
    assert_eq!(emb.lines().next().unwrap(), "dim0,dim1,label");
    assert_eq!(fs::read_to_string(out.join("history.jsonl")).unwrap().lines().count(), 4);
    assert!(out.join("manifest.json").exists());
    assert_eq!(fs::read_to_string(out.join("model.folded.txt")).unwrap().lines().count(), 2);
    assert!(out.join("neighbors.csv").exists());
}

#[test]
fn train_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert!(train_small(&a, &["--threads", "1"]).status.success());
    assert!(train_small(&b, &["--threads", "3"]).status.success());
    for f in ["model.txt", "embedding.csv", "history.jsonl", "manifest.json"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn cube_root_dimensionality() {
    let dir = tempfile::tempdir().unwrap();
    let mut r = rand_chacha::ChaCha8Rng::seed_from_u64(1);
    let header: Vec<String> = (0..500).map(|j| format!("f{j}")).collect();
    let mut csv = header.join(",") + "\n";
    for _ in 0..30 {
        let row: Vec<String> = (0..500).map(|_| r.random::<f64>().to_string()).collect();
        csv += &(row.join(",") + "\n");
    }
    let data = dir.path().join("wide.csv");
    fs::write(&data, csv).unwrap();
    let out = dir.path().join("run");
    let o = gpmal(&["train", "--data", p(&data), "-t", "cr", "--pop", "16", "--generations", "1", "--out", p(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(Model::load(&out.join("model.txt")).unwrap().individual.t(), 8);
}

#[test]
fn transform_reproduces_training_embedding() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    assert!(train_small(&out, &[]).status.success());
    let again = dir.path().join("again.csv");
    let o = gpmal(&[
        "transform", "--model", p(&out.join("model.txt")), "--data", p(&wine_path()),
        "--label", "class", "--out", p(&again),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(fs::read(out.join("embedding.csv")).unwrap(), fs::read(&again).unwrap());
}

#[test]
fn transform_rejects_out_of_range_features() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    assert!(train_small(&out, &[]).status.success());
    let text = fs::read_to_string(out.join("model.txt")).unwrap();
    let mut lines: Vec<&str> = text.lines().collect();
    lines[2] = "(if X138 (sigmoid X475) X475)";
    let bad = dir.path().join("bad.txt");
    fs::write(&bad, lines.join("\n") + "\n").unwrap();
    let o = gpmal(&[
        "transform", "--model", p(&bad), "--data", p(&wine_path()), "--label", "class",
        "--out", p(&dir.path().join("x.csv")),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("475"));
}

#[test]
fn compare_emits_two_rows() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("cmp.csv");
    let o = gpmal(&[
        "compare", "--data", p(&wine_path()), "--label", "class", "--seeds", "1,2", "--pop", "16",
        "--generations", "2", "--out", p(&out),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 3);
    assert_eq!(lines[0], "dataset,method,t,mean,seed_1,seed_2");
    assert!(lines[1].starts_with("wine,gp-mal,2,"));
    let pca: Vec<&str> = lines[2].split(',').collect();
    assert_eq!(&pca[..3], &["wine", "pca", "2"]);
    assert_eq!(pca[4], pca[5]);
}

#[test]
fn evaluate_and_plot_an_embedding() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    assert!(train_small(&out, &[]).status.success());
    let emb = out.join("embedding.csv");
    let report = dir.path().join("report.json");
    let o = gpmal(&["evaluate", "--data", p(&emb), "--out", p(&report)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(json["folds"].as_array().unwrap().len(), 10);
    let svg = dir.path().join("plot.svg");
    let o = gpmal(&["plot", "--data", p(&emb), "--out", p(&svg)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(&svg).unwrap();
    assert_eq!(text.matches("<circle").count(), 178);
    assert_eq!(text.matches("legend-entry").count(), 3);
    assert!(dir.path().join("plot.csv").exists());
}

#[test]
fn exit_codes() {
    assert_eq!(gpmal(&["train"]).status.code(), Some(1));
    assert_eq!(gpmal(&["train", "--data", "x.csv", "--bogus"]).status.code(), Some(1));
    assert_eq!(gpmal(&["train", "--data", "/nonexistent.csv"]).status.code(), Some(2));
    assert_eq!(gpmal(&["--help"]).status.code(), Some(0));
    let dir = tempfile::tempdir().unwrap();
    let o = gpmal(&[
        "train", "--data", p(&wine_path()), "--label", "class", "-t", "14",
        "--out", p(&dir.path().join("o")),
    ]);
    assert_eq!(o.status.code(), Some(1));
    let garbage = dir.path().join("g.csv");
    fs::write(&garbage, "a,b\n1,2\n3,oops\n").unwrap();
    assert_eq!(gpmal(&["train", "--data", p(&garbage)]).status.code(), Some(2));
}

//! The `aggrnet` binary end to end: exit codes and output contracts.

mod common;

use std::path::Path;
use std::process::{Command, Output};
use std::sync::OnceLock;

fn aggrnet(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_aggrnet"))
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn path(dir: &Path, name: &str) -> String {
    dir.join(name).to_string_lossy().into_owned()
}

/// One trained CN1 model (2 epochs on 90 fixture examples), shared by the
/// tests below.
fn trained() -> &'static Path {
    static DIR: OnceLock<tempfile::TempDir> = OnceLock::new();
    DIR.get_or_init(|| {
        let dir = tempfile::tempdir().unwrap();
        let d = dir.path();
        common::write_fixture(d, 90);
        let o = aggrnet(&[
            "train-embeddings", "--mode", "glove++", "--corpus", &path(d, "train.csv"), "--glove",
            &path(d, "glove.txt"), "--out", &path(d, "emb/glove++"), "--epochs", "1",
        ]);
        assert!(o.status.success(), "{}", stderr(&o));
        let o = aggrnet(&[
            "train", "--preset", "cn1", "--train", &path(d, "train.csv"), "--embeddings-dir", &path(d, "emb"),
            "--out-dir", &path(d, "model"), "--epochs", "2", "--filters", "16", "--holdout",
        ]);
        assert!(o.status.success(), "{}", stderr(&o));
        assert!(stderr(&o).contains("seed: 42"), "{}", stderr(&o));
        dir
    })
    .path()
}

#[test]
fn help_everywhere() {
    for sub in ["preprocess", "train-embeddings", "train", "eval", "predict", "export-features"] {
        let o = aggrnet(&[sub, "--help"]);
        assert_eq!(o.status.code(), Some(0), "{sub}");
        assert!(stdout(&o).contains("Usage"), "{sub}");
    }
    assert_eq!(aggrnet(&["--help"]).status.code(), Some(0));
}

#[test]
fn usage_errors() {
    let o = aggrnet(&["train", "--preset", "CN1"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("--train"), "{}", stderr(&o));
    assert_eq!(aggrnet(&["predict", "--model-dir", "x", "--unknown"]).status.code(), Some(1));
    assert_eq!(aggrnet(&["train", "--preset", "CN9"]).status.code(), Some(1));
    assert_eq!(aggrnet(&["frobnicate"]).status.code(), Some(1));
}

#[test]
fn unreadable_input_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let missing = path(dir.path(), "nope.csv");
    let o = aggrnet(&["preprocess", "--in", &missing, "--out", &path(dir.path(), "out.csv")]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("nope.csv"));
    assert!(!dir.path().join("out.csv").exists());
}

#[test]
fn bad_label_names_the_row_and_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.csv"), "id,text,label\na,fine,NAG\nb,oops,XYZ\n").unwrap();
    let o = aggrnet(&["preprocess", "--in", &path(dir.path(), "bad.csv"), "--out", &path(dir.path(), "out.csv")]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("XYZ") && stderr(&o).contains('3'), "{}", stderr(&o));
    assert!(!dir.path().join("out.csv").exists());
}

#[test]
fn preprocess_cleans_text() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("in.csv"),
        "x1,\"hope car occupants are safe and unharmed.\",NAG\nx2,Suuuuper https://t.co/a 99,OAG\n",
    )
    .unwrap();
    let o = aggrnet(&["preprocess", "--in", &path(dir.path(), "in.csv"), "--out", &path(dir.path(), "out.csv")]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = std::fs::read_to_string(dir.path().join("out.csv")).unwrap();
    assert_eq!(out, "id,text,label\nx1,hope car occupants safe unharmed,NAG\nx2,suuper,OAG\n");
}

#[test]
fn predict_contract() {
    let model = path(trained(), "model");
    let o = aggrnet(&["predict", "--model-dir", &model, "--text", "hope car occupants are safe and unharmed."]);
    assert!(o.status.success(), "{}", stderr(&o));
    let line = stdout(&o);
    let fields: Vec<&str> = line.trim_end().split('\t').collect();
    assert_eq!(fields.len(), 4, "{line}");
    assert!(["CAG", "NAG", "OAG"].contains(&fields[0]));
    let probs: Vec<f64> = fields[1..].iter().map(|f| f.parse().unwrap()).collect();
    assert!((probs.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    // Pure function of weights, artifacts and text.
    let again = aggrnet(&["predict", "--model-dir", &model, "--text", "hope car occupants are safe and unharmed."]);
    assert_eq!(stdout(&again), line);

    let texts = trained().join("texts.txt");
    std::fs::write(&texts, "one\n\nthree idiot\n").unwrap();
    let o = aggrnet(&["predict", "--model-dir", &model, "--file", &texts.to_string_lossy()]);
    assert_eq!(stdout(&o).lines().count(), 3);
}

#[test]
fn eval_prints_weighted_f1_and_writes_report() {
    let d = trained();
    let report = path(d, "report.toml");
    let o = aggrnet(&["eval", "--model-dir", &path(d, "model"), "--test", &path(d, "train.csv"), "--report", &report]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    let f1: f64 = out.trim().strip_prefix("weighted_f1=").unwrap().parse().unwrap();
    assert!((0.0..=1.0).contains(&f1));
    let text = std::fs::read_to_string(&report).unwrap();
    for key in ["confusion", "weighted_f1", "[per_class.CAG]", "precision", "support = 30"] {
        assert!(text.contains(key), "{key} missing from report:\n{text}");
    }
}

#[test]
fn export_features_shapes() {
    let d = trained();
    for (which, width) in [("1", 160), ("merged", 480), ("head", 128)] {
        let out = path(d, &format!("f_{which}.tsv"));
        let o = aggrnet(&[
            "export-features", "--model-dir", &path(d, "model"), "--data", &path(d, "train.csv"), "--subnetwork",
            which, "--out", &out,
        ]);
        assert!(o.status.success(), "{}", stderr(&o));
        let text = std::fs::read_to_string(&out).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 91);
        assert!(lines[0].starts_with("id\tlabel\tf0\t"));
        assert_eq!(lines[1].split('\t').count(), 2 + width, "{which}");
    }
    let o = aggrnet(&[
        "export-features", "--model-dir", &path(d, "model"), "--data", &path(d, "train.csv"), "--subnetwork", "4",
        "--out", &path(d, "never.tsv"),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!d.join("never.tsv").exists());
}

#[test]
fn tampered_artifacts_are_rejected() {
    let src = trained().join("model");
    let dir = tempfile::tempdir().unwrap();
    for entry in std::fs::read_dir(&src).unwrap() {
        let entry = entry.unwrap();
        std::fs::copy(entry.path(), dir.path().join(entry.file_name())).unwrap();
    }
    let mut stop = std::fs::read_to_string(dir.path().join("stopwords.txt")).unwrap();
    stop.push_str("hope\n");
    std::fs::write(dir.path().join("stopwords.txt"), stop).unwrap();
    let o = aggrnet(&["predict", "--model-dir", &dir.path().to_string_lossy(), "--text", "hi"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("stopwords.txt"), "{}", stderr(&o));
}

#[test]
fn divergent_training_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    common::write_fixture(d, 30);
    let o = aggrnet(&[
        "train-embeddings", "--mode", "glove++", "--corpus", &path(d, "train.csv"), "--glove", &path(d, "glove.txt"),
        "--out", &path(d, "emb/glove++"), "--epochs", "1",
    ]);
    assert!(o.status.success());
    let o = aggrnet(&[
        "train", "--preset", "CN1", "--train", &path(d, "train.csv"), "--embeddings-dir", &path(d, "emb"),
        "--out-dir", &path(d, "model"), "--epochs", "3", "--filters", "4", "--lr", "1e308",
    ]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    assert!(!d.join("model").exists());
}

#[test]
fn aggression_and_trigram_embeddings() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    common::write_fixture(d, 60);
    for mode in ["aggression", "trigram"] {
        let o = aggrnet(&[
            "train-embeddings", "--mode", mode, "--corpus", &path(d, "train.csv"), "--out", &path(d, mode),
            "--dim", "8", "--epochs", "1", "--seed", "3",
        ]);
        assert!(o.status.success(), "{mode}: {}", stderr(&o));
        assert!(stderr(&o).contains("seed: 3"));
        let manifest = std::fs::read_to_string(d.join(mode).join("manifest.toml")).unwrap();
        assert!(manifest.contains(&format!("embedding_source = \"{mode}\"")), "{manifest}");
    }
    let o = aggrnet(&[
        "train", "--preset", "DL2", "--train", &path(d, "train.csv"), "--embeddings-dir", &path(d, "missing"),
        "--out-dir", &path(d, "m"),
    ]);
    assert_eq!(o.status.code(), Some(2));
}

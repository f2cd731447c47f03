use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use clap::CommandFactory;
use ctx2vec_cli::args::Cli;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn ctx2vec(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ctx2vec"))
        .current_dir(dir)
        .env("RUST_LOG", "warn")
        .args(args)
        .output()
        .expect("binary runs")
}

fn manifests(dir: &Path) -> Vec<serde_json::Value> {
    std::fs::read_to_string(dir.join("ctx2vec-runs.jsonl"))
        .unwrap_or_default()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn help_documents_every_flag() {
    let cli = Cli::command();
    let dir = tempfile::tempdir().unwrap();
    for sub in cli.get_subcommands() {
        let name = sub.get_name();
        let out = ctx2vec(dir.path(), &[name, "--help"]);
        assert!(out.status.success(), "{name} --help failed");
        let text = String::from_utf8(out.stdout).unwrap();
        for arg in sub.get_arguments() {
            let Some(long) = arg.get_long() else { continue };
            assert!(text.contains(&format!("--{long}")), "{name} help lacks --{long}");
            if long != "help" && long != "version" {
                assert!(arg.get_help().is_some(), "{name} --{long} has no description");
            }
        }
    }
    assert!(manifests(dir.path()).is_empty());
}

#[test]
fn prep_applies_the_length_filter() {
    let dir = tempfile::tempdir().unwrap();
    let long_a = (0..12).map(|i| format!("a{i}")).collect::<Vec<_>>().join(" ");
    let long_b = (0..15).map(|i| format!("b{i}")).collect::<Vec<_>>().join("  ");
    std::fs::write(dir.path().join("in.txt"), format!("{long_a}\nx y z w v\n{long_b}\n")).unwrap();

    let out = ctx2vec(dir.path(), &["prep", "--input", "in.txt", "--output", "out.txt", "--vocab", "v.tsv"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let kept = std::fs::read_to_string(dir.path().join("out.txt")).unwrap();
    assert_eq!(kept.lines().count(), 2);
    assert!(kept.lines().all(|l| !l.contains("  ")));
    assert_eq!(std::fs::read_to_string(dir.path().join("v.tsv")).unwrap().lines().count(), 27);

    let out = ctx2vec(
        dir.path(),
        &["prep", "--input", "in.txt", "--output", "all.txt", "--vocab", "v2.tsv", "--no-length-filter"],
    );
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(std::fs::read_to_string(dir.path().join("all.txt")).unwrap().lines().count(), 3);

    let m = manifests(dir.path());
    assert_eq!(m.len(), 2);
    assert_eq!(m[0]["command"], "prep");
    assert_eq!(m[0]["status"], "ok");
    assert_eq!(m[0]["config"]["min-len"], 10);
    assert!(m[0]["inputs"]["in.txt"].as_str().unwrap().len() == 64);
}

fn run_pipeline(dir: &Path) {
    let steps: Vec<Vec<String>> = vec![
        vec!["prep", "--input", s(&fixture("corpus.txt")), "--output", "corpus.txt", "--vocab", "vocab.tsv"],
        vec![
            "gen-teacher", "--corpus", "corpus.txt", "--output", "teacher.ctxv", "--dim", "16", "--groups",
            s(&fixture("groups.tsv")),
        ],
        vec![
            "train", "--corpus", "corpus.txt", "--vocab", "vocab.tsv", "--teacher", "teacher.ctxv", "--output",
            "emb.txt", "--dim", "8", "--epochs", "2", "--eta3", "0.05", "--checkpoint", "model.ckpt",
        ],
        vec!["retrofit", "--input", "emb.txt", "--lexicon", s(&fixture("lexicon.txt")), "--output", "refined.txt"],
        vec![
            "eval", "--embeddings", "refined.txt", "--similarity", s(&fixture("similarity.tsv")), "--analogy",
            s(&fixture("analogy.txt")), "--categorization", s(&fixture("categorization.tsv")), "--output",
            "results.jsonl",
        ],
    ]
    .into_iter()
    .map(|v| v.into_iter().map(String::from).collect())
    .collect();
    for step in &steps {
        let args: Vec<&str> = step.iter().map(String::as_str).collect();
        let out = ctx2vec(dir, &args);
        assert_eq!(out.status.code(), Some(0), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    }
}

#[test]
fn chained_pipeline_writes_manifests_and_results() {
    let dir = tempfile::tempdir().unwrap();
    run_pipeline(dir.path());
    let m = manifests(dir.path());
    let commands: Vec<&str> = m.iter().map(|v| v["command"].as_str().unwrap()).collect();
    assert_eq!(commands, ["prep", "gen-teacher", "train", "retrofit", "eval"]);
    assert!(m.iter().all(|v| v["status"] == "ok" && v["exit_code"] == 0));
    assert_eq!(m[2]["seed"], 1);

    let results = std::fs::read_to_string(dir.path().join("results.jsonl")).unwrap();
    let records: Vec<serde_json::Value> = results.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(records.len(), 3);
    for r in &records {
        assert!(r["covered"].as_u64().unwrap() > 0);
        assert!(r["score"].as_f64().unwrap().is_finite());
    }
    for meta in ["emb.txt.meta.json", "refined.txt.meta.json"] {
        let v: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(dir.path().join(meta)).unwrap()).unwrap();
        assert!(v.get("report").is_some());
    }

    let out = ctx2vec(dir.path(), &["nn", "--embeddings", "refined.txt", "--word", "c03w01", "--top", "4"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 4);
    assert!(text.lines().all(|l| l.starts_with("c03w01\t")));

    // resuming from the checkpoint works on the same inputs
    let out = ctx2vec(
        dir.path(),
        &[
            "train", "--corpus", "corpus.txt", "--vocab", "vocab.tsv", "--teacher", "teacher.ctxv", "--output",
            "emb2.txt", "--dim", "8", "--epochs", "1", "--eta3", "0.05", "--resume", "model.ckpt",
        ],
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn eval_with_missing_input_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let out = ctx2vec(
        dir.path(),
        &["eval", "--embeddings", "nope.txt", "--similarity", "also-missing.tsv", "--output", "results.jsonl"],
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(!dir.path().join("results.jsonl").exists());
    let m = manifests(dir.path());
    assert_eq!(m.len(), 1);
    assert_eq!(m[0]["status"], "data-error");
    assert_eq!(m[0]["inputs"]["nope.txt"], serde_json::Value::Null);
}

#[test]
fn usage_errors_exit_one_and_are_logged() {
    let dir = tempfile::tempdir().unwrap();
    let out = ctx2vec(dir.path(), &["nn", "--embeddings", "e.txt", "--word", "a", "--bogus"]);
    assert_eq!(out.status.code(), Some(1));
    let out = ctx2vec(dir.path(), &["retrofit", "--input", "a", "--lexicon", "b", "--output", "c", "--alpha", "0"]);
    assert_eq!(out.status.code(), Some(1));
    let out = ctx2vec(dir.path(), &["frobnicate"]);
    assert_eq!(out.status.code(), Some(1));
    let m = manifests(dir.path());
    assert_eq!(m.len(), 3);
    assert!(m.iter().all(|v| v["status"] == "usage-error"));
    assert_eq!(m[0]["command"], "nn");
}

#[test]
fn config_file_fills_in_flags_and_flags_win() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("run.conf"),
        format!("# prep settings\ninput = {}\noutput = out.txt\nvocab = v.tsv\nmin-len = 1000\n", s(&fixture("corpus.txt"))),
    )
    .unwrap();
    // min-len from the file would drop every line; the flag overrides it
    let out = ctx2vec(dir.path(), &["--config", "run.conf", "prep", "--min-len", "10"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let m = manifests(dir.path());
    assert_eq!(m[0]["config"]["min-len"], 10);
    assert_eq!(m[0]["config"]["output"], "out.txt");

    std::fs::write(dir.path().join("bad.conf"), "epochs = 3\n").unwrap();
    let out = ctx2vec(dir.path(), &["prep", "--config", "bad.conf", "--input", "x", "--output", "y", "--vocab", "z"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn misaligned_teacher_is_a_data_error() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert!(ctx2vec(d, &["prep", "--input", s(&fixture("corpus.txt")), "--output", "c.txt", "--vocab", "v.tsv"])
        .status
        .success());
    std::fs::write(d.join("short.txt"), "c00w00 c00w01\n").unwrap();
    assert!(ctx2vec(d, &["gen-teacher", "--corpus", "short.txt", "--output", "t.ctxv", "--dim", "4"]).status.success());
    let out = ctx2vec(
        d,
        &["train", "--corpus", "c.txt", "--vocab", "v.tsv", "--teacher", "t.ctxv", "--output", "e.txt", "--dim", "4"],
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("sentence"));
}

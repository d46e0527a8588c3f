use std::path::{Path, PathBuf};
use std::process::Command;

use bilinear_ac::cli::RunManifest;

const TINY: [&str; 8] = [
    "--override",
    "train.total_steps=600",
    "--override",
    "train.warmup_steps=300",
    "--override",
    "train.eval_every=300",
    "--override",
    "train.batch=32",
];

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_bilinear-ac"));
    c.env("RUST_LOG", "error");
    c
}

fn run_dirs(out: &Path) -> Vec<PathBuf> {
    let mut v: Vec<PathBuf> = std::fs::read_dir(out).unwrap().map(|e| e.unwrap().path()).collect();
    v.sort();
    v
}

#[test]
fn unknown_config_key_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let status = bin()
        .args(["train", "--override", "train.no_such_key=1", "--out"])
        .arg(dir.path())
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
}

#[test]
fn invalid_value_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args(["train", "--override", "model.k=0", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("error[config]"));
}

#[test]
fn unknown_subcommand_is_usage_error() {
    let status = bin().arg("fly").status().unwrap();
    assert_eq!(status.code(), Some(2));
}

#[test]
fn missing_config_file_is_config_error() {
    let status = bin().args(["train", "--config", "/nonexistent/run.toml"]).status().unwrap();
    assert_eq!(status.code(), Some(2));
}

#[test]
fn train_then_eval_leaves_checkpoint_untouched() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("runs");
    let status = bin().arg("train").args(TINY).args(["--seeds", "3", "--out"]).arg(&out).status().unwrap();
    assert!(status.success());
    let train_dir = run_dirs(&out).pop().unwrap();
    let m = RunManifest::read(&train_dir).unwrap();
    assert_eq!(m.status, "ok");
    assert_eq!(m.seeds, vec![3]);
    m.verify(&train_dir).unwrap();
    for f in ["learning_curve.csv", "checkpoint.json", "config.toml", "episode_log.csv"] {
        assert!(m.files.iter().any(|e| e.path == f), "{f} missing from manifest");
    }

    let ckpt = train_dir.join("checkpoint.json");
    let before = std::fs::read(&ckpt).unwrap();
    let status = bin()
        .arg("eval-zeroshot")
        .args(["--thetas", "22.5", "--checkpoint"])
        .arg(&ckpt)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    assert_eq!(before, std::fs::read(&ckpt).unwrap());

    let eval_dir = run_dirs(&out).into_iter().find(|p| p.file_name().unwrap().to_string_lossy().starts_with("eval-zeroshot")).unwrap();
    let m = RunManifest::read(&eval_dir).unwrap();
    m.verify(&eval_dir).unwrap();
    let csv = std::fs::read_to_string(eval_dir.join("zeroshot.csv")).unwrap();
    assert_eq!(csv.lines().count(), 2);
}

#[test]
fn corrupt_checkpoint_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let ckpt = dir.path().join("bad.json");
    std::fs::write(&ckpt, "{\"not\": \"a checkpoint\"}").unwrap();
    let status = bin()
        .arg("sweep-g")
        .arg("--checkpoint")
        .arg(&ckpt)
        .arg("--out")
        .arg(dir.path().join("runs"))
        .status()
        .unwrap();
    assert!(!status.success());
}

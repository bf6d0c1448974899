//! End-to-end checks of the command-line surface: exit codes, artifact
//! layout, and checkpoint handling.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn cascade(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cascade"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("run.toml");
    fs::write(&path, body).unwrap();
    path.display().to_string()
}

const TINY_TRAIN: &str = r#"
master_seed = 3

[train]
iterations = 1
horizon = 20
episodes_per_iteration = 2
epochs_per_iteration = 1
minibatch_size = 64
"#;

#[test]
fn missing_config_exits_with_usage_error() {
    let out = cascade(&["train", "--config", "/nonexistent/run.toml"]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("/nonexistent/run.toml"), "stderr: {stderr}");
}

#[test]
fn unknown_config_key_exits_with_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[train]\nlerning_rate = 0.1\n");
    let out = cascade(&["train", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn zero_iteration_training_writes_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[train]\niterations = 0\nhorizon = 10\n");
    let out_dir = dir.path().join("out");
    let out = cascade(&["train", "--config", &cfg, "--out", out_dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    assert!(out_dir.join("checkpoint.bin").exists());
    assert!(out_dir.join("training_log.csv").exists());
    assert!(out_dir.join("resolved_config.toml").exists());
    let log = fs::read_to_string(out_dir.join("training_log.csv")).unwrap();
    assert_eq!(log.lines().count(), 1, "header only for zero iterations");

    // The checkpoint loads and describes cleanly.
    let describe = cascade(&["describe", "--checkpoint", out_dir.join("checkpoint.bin").to_str().unwrap()]);
    assert_eq!(describe.status.code(), Some(0));
    let text = String::from_utf8_lossy(&describe.stdout);
    assert!(text.contains("format version: 1"));
    assert!(text.contains("ok"));
}

#[test]
fn training_log_rows_match_iterations_and_artifacts_are_consistent() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), TINY_TRAIN);
    let out_dir = dir.path().join("out");
    let out = cascade(&["train", "--config", &cfg, "--out", out_dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let log = fs::read_to_string(out_dir.join("training_log.csv")).unwrap();
    assert_eq!(log.lines().count(), 2);
    assert!(log.starts_with("iter,mean_return,mean_cost,lambda,policy_std"));
}

#[test]
fn sweep_emits_per_pair_rows_and_heatmaps() {
    let dir = tempfile::tempdir().unwrap();
    let body = format!(
        "{TINY_TRAIN}\n[sweep]\nomega_n = [8.0]\nzeta = [0.7]\nepisodes = 2\n"
    );
    let cfg = write_config(dir.path(), &body);
    let train_dir = dir.path().join("train");
    assert_eq!(
        cascade(&["train", "--config", &cfg, "--out", train_dir.to_str().unwrap()])
            .status
            .code(),
        Some(0)
    );
    let ckpt = train_dir.join("checkpoint.bin");
    let sweep_dir = dir.path().join("sweep");
    let out = cascade(&[
        "sweep",
        "--config",
        &cfg,
        "--checkpoint",
        ckpt.to_str().unwrap(),
        "--out",
        sweep_dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(sweep_dir.join("sweep.csv")).unwrap();
    assert_eq!(csv.lines().count(), 2);
    for metric in ["p_fail", "mean_err", "mean_ref_var", "sat_freq"] {
        assert!(sweep_dir.join(format!("heatmap_{metric}.csv")).exists());
    }
    assert!(sweep_dir.join("sweep_meta.toml").exists());
}

#[test]
fn corrupted_checkpoint_is_refused() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), TINY_TRAIN);
    let train_dir = dir.path().join("train");
    assert_eq!(
        cascade(&["train", "--config", &cfg, "--out", train_dir.to_str().unwrap()])
            .status
            .code(),
        Some(0)
    );
    let ckpt = train_dir.join("checkpoint.bin");
    let mut bytes = fs::read(&ckpt).unwrap();
    let mid = bytes.len() / 2;
    bytes[mid] ^= 0x55;
    fs::write(&ckpt, &bytes).unwrap();
    let out = cascade(&[
        "sweep",
        "--config",
        &cfg,
        "--checkpoint",
        ckpt.to_str().unwrap(),
        "--out",
        dir.path().join("sweep").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("checksum"));
}

#[test]
fn certify_refuses_deterministic_plant() {
    let dir = tempfile::tempdir().unwrap();
    let body = format!("{TINY_TRAIN}\n[certify]\nnoise_sigma = 0.0\n");
    let cfg = write_config(dir.path(), &body);
    let train_dir = dir.path().join("train");
    assert_eq!(
        cascade(&["train", "--config", &cfg, "--out", train_dir.to_str().unwrap()])
            .status
            .code(),
        Some(0)
    );
    let out = cascade(&[
        "certify",
        "--config",
        &cfg,
        "--checkpoint",
        train_dir.join("checkpoint.bin").to_str().unwrap(),
        "--out",
        dir.path().join("cert").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("degenerate"));
}

#[test]
fn certify_writes_a_certificate_report() {
    let dir = tempfile::tempdir().unwrap();
    let body = format!(
        "{TINY_TRAIN}\n[certify]\nomega_n = 12.0\nzeta = 1.0\nnoise_sigma = 0.05\nepisodes = 5\n"
    );
    let cfg = write_config(dir.path(), &body);
    let train_dir = dir.path().join("train");
    assert_eq!(
        cascade(&["train", "--config", &cfg, "--out", train_dir.to_str().unwrap()])
            .status
            .code(),
        Some(0)
    );
    let cert_dir = dir.path().join("cert");
    let out = cascade(&[
        "certify",
        "--config",
        &cfg,
        "--checkpoint",
        train_dir.join("checkpoint.bin").to_str().unwrap(),
        "--out",
        cert_dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let report = fs::read_to_string(cert_dir.join("certificate.toml")).unwrap();
    assert!(report.contains("[certificate]"));
    assert!(report.contains("bound = "));
    assert!(report.contains("[empirical]"));
}

#[test]
fn oracle_passes_and_mutant_mode_fails() {
    let ok = cascade(&["oracle", "--seed", "0", "--count", "20"]);
    assert_eq!(ok.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&ok.stderr));
    let stdout = String::from_utf8_lossy(&ok.stdout);
    assert!(stdout.contains("all oracle inequalities hold"));

    let bad = cascade(&["oracle", "--seed", "0", "--count", "3", "--mutant"]);
    assert_eq!(bad.status.code(), Some(1));
}

//! End-to-end CLI checks: exit codes, artifact determinism, and the
//! warm-start contract, all through the installed binary.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_stairclimb"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn stairclimb")
}

fn write_tiny_config(path: &Path, out_dir: &Path, seed: u64) {
    let cfg = format!(
        r#"{{
  "seed": {seed},
  "stage": "stage2",
  "terrain": {{"kind": "straight", "mode": "train"}},
  "curriculum": {{"enabled": false, "initial_level": 1}},
  "ppo": {{"n_env": 4, "rollout_steps": 8, "iterations": 2, "epochs": 1,
           "minibatches": 2, "checkpoint_every": 0}},
  "out_dir": "{}"
}}"#,
        out_dir.display()
    );
    fs::write(path, cfg).unwrap();
}

#[test]
fn gen_terrain_writes_three_files_deterministically() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("t");
    let args = [
        "gen-terrain",
        "--kind",
        "u_shaped",
        "--level",
        "3",
        "--mode",
        "test",
        "--seed",
        "1",
        "--out",
    ];
    let o = bin().args(args).arg(&out).output().unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let files: Vec<_> = fs::read_dir(&out).unwrap().map(|e| e.unwrap().path()).collect();
    assert_eq!(files.len(), 3, "expected csv+pgm+json");
    let mut bytes: Vec<(String, Vec<u8>)> = files
        .iter()
        .map(|p| (p.display().to_string(), fs::read(p).unwrap()))
        .collect();
    bytes.sort();

    // Second run into a fresh dir: identical bytes.
    let out2 = dir.path().join("t2");
    let o = bin().args(args).arg(&out2).output().unwrap();
    assert!(o.status.success());
    let mut bytes2: Vec<(String, Vec<u8>)> = fs::read_dir(&out2)
        .unwrap()
        .map(|e| {
            let p = e.unwrap().path();
            (p.display().to_string(), fs::read(&p).unwrap())
        })
        .collect();
    bytes2.sort();
    for ((_, a), (_, b)) in bytes.iter().zip(&bytes2) {
        assert_eq!(a, b, "regenerated terrain files must be byte-identical");
    }
}

#[test]
fn gen_terrain_rejects_out_of_range_level_with_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&[
        "gen-terrain",
        "--kind",
        "straight",
        "--level",
        "11",
        "--mode",
        "train",
        "--seed",
        "0",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&[
        "gen-terrain",
        "--kind",
        "dodecahedral",
        "--level",
        "1",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn train_missing_config_exits_2() {
    let o = run(&["train", "--config", "/definitely/not/here.json"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn usage_errors_exit_2() {
    let o = run(&["not-a-command"]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["eval"]); // missing required args
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn eval_missing_checkpoint_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&[
        "eval",
        "--checkpoint",
        "/missing/ckpt",
        "--terrain",
        "straight",
        "--levels",
        "1,2",
        "--episodes",
        "1",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn train_twice_same_seed_identical_metrics_and_env_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("cfg.json");
    let out1 = dir.path().join("r1");
    write_tiny_config(&cfg_path, &out1, 7);
    let o = run(&["train", "--config", cfg_path.to_str().unwrap(), "--workers", "1"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));

    let out2 = dir.path().join("r2");
    let o = bin()
        .args(["train", "--config", cfg_path.to_str().unwrap(), "--workers", "2", "--out"])
        .arg(&out2)
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));

    let m1 = fs::read(out1.join("metrics.csv")).unwrap();
    let m2 = fs::read(out2.join("metrics.csv")).unwrap();
    assert_eq!(m1, m2, "same seed, different workers: identical metrics bytes");
    assert_eq!(
        fs::read(out1.join("ckpt_stage2_final.bin")).unwrap(),
        fs::read(out2.join("ckpt_stage2_final.bin")).unwrap()
    );

    // STAIRCLIMB_SEED overrides the config seed and lands in the resolved
    // config (and therefore in different training randomness).
    let out3 = dir.path().join("r3");
    let o = bin()
        .args(["train", "--config", cfg_path.to_str().unwrap(), "--workers", "1", "--out"])
        .arg(&out3)
        .env("STAIRCLIMB_SEED", "99")
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let resolved = fs::read_to_string(out3.join("resolved_config.json")).unwrap();
    assert!(resolved.contains("\"seed\": 99"));
    let m3 = fs::read(out3.join("metrics.csv")).unwrap();
    assert_ne!(m1, m3, "different seed must change the run");
}

#[test]
fn stage2_warm_start_restores_stage1_weights() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("cfg.json");
    let out1 = dir.path().join("stage1");
    write_tiny_config(&cfg_path, &out1, 5);
    let o = run(&[
        "train",
        "--config",
        cfg_path.to_str().unwrap(),
        "--stage",
        "stage1",
        "--workers",
        "1",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let stage1_ckpt = out1.join("ckpt_stage1_final");

    // Zero-iteration stage-2 run warm-started from stage 1: its final
    // checkpoint equals the warm-start weights exactly.
    let cfg2_path = dir.path().join("cfg2.json");
    let out2 = dir.path().join("stage2");
    let cfg2 = format!(
        r#"{{
  "seed": 5,
  "stage": "stage2",
  "terrain": {{"kind": "u_shaped", "mode": "train"}},
  "curriculum": {{"enabled": false, "initial_level": 1}},
  "ppo": {{"n_env": 4, "rollout_steps": 8, "iterations": 0, "epochs": 1,
           "minibatches": 2, "checkpoint_every": 0}},
  "out_dir": "{}"
}}"#,
        out2.display()
    );
    fs::write(&cfg2_path, cfg2).unwrap();
    let o = bin()
        .args([
            "train",
            "--config",
            cfg2_path.to_str().unwrap(),
            "--warm-start",
        ])
        .arg(&stage1_ckpt)
        .args(["--workers", "1"])
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(
        fs::read(stage1_ckpt.with_extension("bin")).unwrap(),
        fs::read(out2.join("ckpt_stage2_final.bin")).unwrap(),
        "stage-2 iteration-0 parameters must equal the stage-1 checkpoint"
    );
}

#[test]
fn transfer_and_heatmap_emit_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("cfg.json");
    let out1 = dir.path().join("m1");
    write_tiny_config(&cfg_path, &out1, 3);
    let o = run(&["train", "--config", cfg_path.to_str().unwrap(), "--workers", "1"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let ckpt = out1.join("ckpt_stage2_final");

    // Transfer matrix over a 1-model x 2-terrain grid.
    let tdir = dir.path().join("transfer");
    let o = bin()
        .args(["transfer", "--models"])
        .arg(&ckpt)
        .args(["--terrains", "straight,u_shaped", "--episodes", "2", "--out"])
        .arg(&tdir)
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let matrix = fs::read_to_string(tdir.join("transfer_matrix.csv")).unwrap();
    assert_eq!(matrix.lines().count(), 3, "header + 2 rows");
    assert!(matrix.starts_with("model,terrain,s_level3,s_level4,total,transferability"));

    // Heatmap CSV + PGM + sidecar.
    let hdir = dir.path().join("heatmap");
    let o = bin()
        .args(["heatmap", "--checkpoint"])
        .arg(&ckpt)
        .args(["--terrain", "u_shaped", "--level", "2", "--spacing", "0.25", "--out"])
        .arg(&hdir)
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(hdir.join("heatmap_u_shaped.csv").exists());
    assert!(hdir.join("heatmap_u_shaped.pgm").exists());
    assert!(hdir.join("heatmap_u_shaped.json").exists());
}

#[test]
fn eval_sweep_writes_per_level_rows() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("cfg.json");
    let out1 = dir.path().join("m");
    write_tiny_config(&cfg_path, &out1, 2);
    let o = run(&["train", "--config", cfg_path.to_str().unwrap(), "--workers", "1"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let ckpt = out1.join("ckpt_stage2_final");

    let edir = dir.path().join("eval");
    let o = bin()
        .args(["eval", "--checkpoint"])
        .arg(&ckpt)
        .args([
            "--terrain",
            "u_shaped",
            "--levels",
            "1..6",
            "--mode",
            "test",
            "--episodes",
            "2",
            "--out",
        ])
        .arg(&edir)
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(edir.join("eval_u_shaped_test.csv")).unwrap();
    assert_eq!(csv.lines().count(), 7, "header + 6 level rows");
}

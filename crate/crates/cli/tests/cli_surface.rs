//! Black-box checks of the command-line binary: exit codes, output files,
//! and config validation. Heavy experiments are exercised elsewhere through
//! the library; everything here runs small configs only.

use std::path::Path;
use std::process::{Command, Output};

fn commgp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_commgp"))
        .args(args)
        .output()
        .expect("binary spawns")
}

fn write(path: &Path, contents: &str) {
    std::fs::write(path, contents).expect("write config");
}

#[test]
fn info_prints_default_configs() {
    let out = commgp(&["info"]);
    assert!(out.status.success(), "info failed: {out:?}");
    let text = String::from_utf8(out.stdout).expect("utf8");
    for key in ["rd_curve", "dimred_compare", "gp1d", "rate_sweep", "\"schema\": 1"] {
        assert!(text.contains(key), "info output missing {key}:\n{text}");
    }
}

#[test]
fn malformed_config_exits_2() {
    let dir = tempfile::tempdir().expect("temp dir");
    let cfg = dir.path().join("bad.json");

    write(&cfg, "{ not json");
    let out = commgp(&["rd-curve", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2), "parse error: {out:?}");

    write(&cfg, r#"{"schema":99,"seed":1,"dim":4,"samples":100,"rates":[4],"spectrum_decay":0.5}"#);
    let out = commgp(&["rd-curve", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2), "wrong schema: {out:?}");
    assert!(
        String::from_utf8_lossy(&out.stderr).contains("schema"),
        "stderr should mention the schema: {out:?}"
    );

    write(
        &cfg,
        r#"{"schema":1,"seed":1,"dim":4,"samples":100,"rates":[8,4],"spectrum_decay":0.5}"#,
    );
    let out = commgp(&["rd-curve", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2), "non-increasing rates: {out:?}");

    write(
        &cfg,
        r#"{"schema":1,"seed":1,"dim":4,"samples":100,"rates":[4],"spectrum_decay":0.5,"surprise":1}"#,
    );
    let out = commgp(&["rd-curve", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2), "unknown field: {out:?}");
}

#[test]
fn missing_config_file_exits_1() {
    let out = commgp(&["rd-curve", "--config", "/nonexistent/nowhere.json"]);
    assert_eq!(out.status.code(), Some(1), "io error: {out:?}");
}

#[test]
fn rd_curve_writes_outputs_and_respects_seed_flag() {
    let dir = tempfile::tempdir().expect("temp dir");
    let cfg = dir.path().join("cfg.json");
    write(
        &cfg,
        r#"{"schema":1,"seed":3,"dim":3,"samples":400,"rates":[4,8],"spectrum_decay":0.6}"#,
    );

    let out_a = dir.path().join("a");
    let run = commgp(&[
        "rd-curve",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out_a.to_str().unwrap(),
    ]);
    assert!(run.status.success(), "run failed: {run:?}");
    let csv_a = std::fs::read(out_a.join("rd_curve.csv")).expect("csv written");
    let json_a = std::fs::read_to_string(out_a.join("rd_curve.json")).expect("json written");
    assert!(json_a.contains("\"experiment\": \"rd_curve\""));

    // Same config, second directory: byte-identical CSV.
    let out_b = dir.path().join("b");
    let run = commgp(&[
        "rd-curve",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out_b.to_str().unwrap(),
    ]);
    assert!(run.status.success());
    let csv_b = std::fs::read(out_b.join("rd_curve.csv")).expect("csv written");
    assert_eq!(csv_a, csv_b, "rerun changed bytes");

    // --seed overrides the config seed.
    let out_c = dir.path().join("c");
    let run = commgp(&[
        "rd-curve",
        "--config",
        cfg.to_str().unwrap(),
        "--seed",
        "4",
        "--out",
        out_c.to_str().unwrap(),
    ]);
    assert!(run.status.success());
    let csv_c = std::fs::read(out_c.join("rd_curve.csv")).expect("csv written");
    assert_ne!(csv_a, csv_c, "--seed had no effect");
}

#[test]
fn gp1d_rejects_rates_beyond_codec_range() {
    let dir = tempfile::tempdir().expect("temp dir");
    let cfg = dir.path().join("cfg.json");
    write(
        &cfg,
        r#"{"schema":1,"seed":1,"train_points":20,"grid_points":5,"input_halfwidth":2.0,
            "rates":[1,99],
            "data_kernel":{"squared_exponential":{"amplitude":1.0,"length_scale":1.0}},
            "data_noise_variance":0.01,
            "model":{"kernel":{"squared_exponential":{"amplitude":1.0,"length_scale":1.0}},
                     "noise_variance":0.1,"max_iters":5,"tol":0.001,"fit_hyperparameters":false}}"#,
    );
    let out = commgp(&["gp1d", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2), "rate 99 should fail validation: {out:?}");
}

#[test]
fn rate_sweep_dumps_gram_matrices_on_request() {
    let dir = tempfile::tempdir().expect("temp dir");
    let cfg = dir.path().join("cfg.json");
    // Smallest meaningful fleet; hyperparameter fitting off keeps this fast
    // even in debug builds.
    write(
        &cfg,
        r#"{"schema":1,"seed":2,"machines":2,"dim":2,"train_per_machine":12,"test_points":4,
            "rates":[0,8],"protocols":["full","single_center"],"codec":"per_symbol","input_decay":0.7,
            "data_kernel":{"squared_exponential":{"amplitude":1.0,"length_scale":2.0}},
            "data_noise_variance":0.1,
            "model":{"kernel":{"squared_exponential":{"amplitude":1.0,"length_scale":2.0}},
                     "noise_variance":0.1,"max_iters":3,"tol":0.01,"fit_hyperparameters":false}}"#,
    );
    let out_dir = dir.path().join("out");
    let grams = dir.path().join("grams");
    let run = commgp(&[
        "rate-sweep",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
        "--dump-grams",
        grams.to_str().unwrap(),
    ]);
    assert!(run.status.success(), "run failed: {run:?}");

    let csv = std::fs::read_to_string(out_dir.join("rate_sweep.csv")).expect("csv written");
    let mut lines = csv.lines();
    assert_eq!(
        lines.next(),
        Some("rate,protocol,smse,total_bits,bcm_fallbacks")
    );
    // One row per (rate, protocol) pair.
    assert_eq!(lines.count(), 4);

    let full = std::fs::read(grams.join("gram_full.bin")).expect("reference gram dumped");
    // 24 training rows squared, 8 bytes per entry.
    assert_eq!(full.len(), 24 * 24 * 8);
    assert!(grams.join("gram_single_center_r8.bin").exists());
}

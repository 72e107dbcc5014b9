use std::path::Path;
use std::process::{Command, Output};

fn gatekeeper(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gatekeeper"))
        .current_dir(dir)
        .env_remove("GATEKEEPER_THREADS")
        .args(args)
        .output()
        .expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn no_subcommand_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = gatekeeper(dir.path(), &[]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("usage: gatekeeper"));
}

#[test]
fn bad_flag_and_bad_scale_are_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(
        gatekeeper(dir.path(), &["design", "--scale", "3"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(
        gatekeeper(dir.path(), &["sweep", "--nonsense"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(
        gatekeeper(dir.path(), &["--threads", "0", "design"])
            .status
            .code(),
        Some(1)
    );
}

#[test]
fn help_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let o = gatekeeper(dir.path(), &["--help"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stdout).contains("sweep"));
}

#[test]
fn unknown_config_key_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(&cfg, r#"{"des": {"arivals": 10}}"#).unwrap();
    let o = gatekeeper(dir.path(), &["--config", cfg.to_str().unwrap(), "des"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("arivals"));
}

#[test]
fn computation_error_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let o = gatekeeper(dir.path(), &["equilibrium", "--t-bar=0"]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    let o = gatekeeper(dir.path(), &["fit", "--input", "missing.csv"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn existing_output_needs_force() {
    let dir = tempfile::tempdir().unwrap();
    assert!(gatekeeper(dir.path(), &["design"]).status.success());
    let o = gatekeeper(dir.path(), &["design", "--scale", "2"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(std::fs::read_to_string(dir.path().join("out/design.csv"))
        .unwrap()
        .contains("\n1,1,1,"));
    assert!(
        gatekeeper(dir.path(), &["--force", "design", "--scale", "2"])
            .status
            .success()
    );
    assert!(std::fs::read_to_string(dir.path().join("out/design.csv"))
        .unwrap()
        .contains("\n2,1,1,"));
}

#[test]
fn design_rows_balance_at_position_six() {
    let dir = tempfile::tempdir().unwrap();
    assert!(
        gatekeeper(dir.path(), &["--out", "o", "design", "--scale", "1"])
            .status
            .success()
    );
    let text = std::fs::read_to_string(dir.path().join("o/design.csv")).unwrap();
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let col = |n: &str| header.iter().position(|h| *h == n).unwrap();
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 33);
    for r in rows.iter().filter(|r| r[col("position")] == "6") {
        assert_eq!(r[col("exp_time_A")], r[col("exp_time_B")]);
    }
}

#[test]
fn simulate_then_fit_and_analyze_the_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(
        &cfg,
        r#"{"seed": 3, "simulate": {"arms": [
            {"treatment": {"context": true, "transparency": true, "nudge": false, "deterministic": false, "scale": 2}, "n_subjects": 40},
            {"treatment": {"context": true, "transparency": true, "nudge": true, "deterministic": false, "scale": 2}, "n_subjects": 40},
            {"treatment": {"context": true, "transparency": false, "nudge": false, "deterministic": false, "scale": 2}, "n_subjects": 40}
        ]}, "fit": {"options": {"n_starts": 2}, "bootstrap_replicates": 4}}"#,
    )
    .unwrap();
    let c = cfg.to_str().unwrap();
    assert!(gatekeeper(dir.path(), &["--config", c, "simulate"])
        .status
        .success());
    let o = gatekeeper(
        dir.path(),
        &["--config", c, "fit", "--input", "out/simulate.csv"],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let fit: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("out/fit.json")).unwrap())
            .unwrap();
    assert_eq!(fit["n_records"], 120 * 33);
    assert_eq!(fit["estimates"].as_array().unwrap().len(), 6);
    assert!(gatekeeper(
        dir.path(),
        &["--config", c, "analyze", "--input", "out/simulate.csv"]
    )
    .status
    .success());
    let an: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("out/analyze.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(an["groups"].as_array().unwrap().len(), 3);
    assert_eq!(an["n_subjects"], 120);
}

#[test]
fn des_trace_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let o = gatekeeper(
        dir.path(),
        &[
            "des",
            "--arrivals",
            "2000",
            "--replications",
            "3",
            "--trace",
        ],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let trace = std::fs::read_to_string(dir.path().join("out/des.csv")).unwrap();
    assert_eq!(trace.lines().count(), 2001);
    let des: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("out/des.json")).unwrap())
            .unwrap();
    assert_eq!(des["replications"].as_array().unwrap().len(), 3);
    assert_eq!(des["formula_wait"], 2.5);
}

#[test]
fn threads_env_is_overridden_by_flag() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_gatekeeper"))
        .current_dir(dir.path())
        .env("GATEKEEPER_THREADS", "0")
        .args(["--threads", "2", "equilibrium"])
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
}

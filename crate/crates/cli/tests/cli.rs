use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_bellman-verify"));
    cmd.env_remove("BELLMAN_VERIFY_WORKERS");
    cmd
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn eval_reports_value_and_region() {
    let out = run(&["eval", "--c", "2", "--x", "1", "--y", "0", "--w", "1", "--v", "1"]);
    assert_eq!(code(&out), 0);
    let doc = json(&out);
    assert_eq!(doc["tool"], "bellman-verify");
    assert_eq!(doc["eval"]["region"], "D3");
    assert_eq!(doc["eval"]["value"].as_f64().unwrap(), -2_457_600.0);
}

#[test]
fn eval_at_origin_is_degenerate() {
    let out = run(&["eval", "--c", "2", "--x", "0", "--y", "0", "--w", "1", "--v", "1"]);
    assert_eq!(code(&out), 0);
    assert_eq!(json(&out)["eval"]["degenerate"], true);
}

#[test]
fn usage_errors_exit_2() {
    for args in [
        &["eval", "--c", "2", "--x", "1", "--y", "0", "--w", "1", "--v", "3"][..],
        &["eval", "--c", "0.5", "--x", "1", "--y", "0", "--w", "1", "--v", "1"],
        &["verify", "--suite", "nonsense"],
        &["simulate", "--depth", "25"],
        &["simulate", "--h-law", "constant:2"],
        &["frobnicate"],
        &["report", "/no/such/path"],
    ] {
        let out = run(args);
        assert_eq!(code(&out), 2, "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    }
}

#[test]
fn verify_passes_and_is_byte_identical() {
    let args = ["verify", "--suite", "initial", "--c", "2,4", "--grid", "2000"];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    let doc = json(&a);
    assert_eq!(doc["pass"], true);
    assert_eq!(doc["config"]["c"], serde_json::json!([2.0, 4.0]));
}

#[test]
fn simulate_is_byte_identical_across_worker_counts() {
    let base = ["simulate", "--trees", "20", "--depth", "6", "--seed", "3"];
    let one = run(&[&["--workers", "1"][..], &base].concat());
    let four = run(&[&["--workers", "4"][..], &base].concat());
    assert_eq!(code(&one), 0);
    assert_eq!(one.stdout, four.stdout);
}

#[test]
fn csv_output_has_header_comment() {
    let out = run(&["--format", "csv", "simulate", "--trees", "2", "--depth", "3"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    let first = lines.next().unwrap();
    assert!(first.starts_with("# bellman-verify "), "{first}");
    assert!(first.contains(" config="));
    assert!(lines.next().unwrap().starts_with("tree,depth,"));
    assert_eq!(lines.count(), 2);
}

#[test]
fn zero_trees_is_empty_and_passes() {
    let out = run(&["--format", "csv", "simulate", "--trees", "0"]);
    assert_eq!(code(&out), 0);
    assert_eq!(String::from_utf8(out.stdout).unwrap().lines().count(), 2);
}

#[test]
fn config_file_is_read_and_flags_win() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "# example\ntrees = 3\nseed = 5\ndepth = 4\n").unwrap();
    let cfg = cfg.to_str().unwrap();
    let out = run(&["--config", cfg, "simulate", "--seed", "7"]);
    assert_eq!(code(&out), 0);
    let config = &json(&out)["config"];
    assert_eq!(config["trees"], 3);
    assert_eq!(config["depth"], 4);
    assert_eq!(config["seed"], 7);

    fs::write(dir.path().join("bad.cfg"), "colour = blue\n").unwrap();
    let bad = dir.path().join("bad.cfg");
    let out = run(&["--config", bad.to_str().unwrap(), "simulate"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn config_hash_tracks_config() {
    let hash = |seed: &str| {
        json(&run(&["simulate", "--trees", "1", "--depth", "2", "--seed", seed]))["config_hash"]
            .as_str()
            .unwrap()
            .to_string()
    };
    assert_eq!(hash("1"), hash("1"));
    assert_ne!(hash("1"), hash("2"));
}

#[test]
fn workers_env_var_is_honoured() {
    let out = bin()
        .env("BELLMAN_VERIFY_WORKERS", "0")
        .args(["simulate", "--trees", "1"])
        .output()
        .unwrap();
    assert_eq!(code(&out), 2);
    let out = bin()
        .env("BELLMAN_VERIFY_WORKERS", "2")
        .args(["simulate", "--trees", "1", "--depth", "3"])
        .output()
        .unwrap();
    assert_eq!(code(&out), 0);
}

fn write_outputs(dir: &Path) {
    let out = run(&["--out", dir.to_str().unwrap(), "simulate", "--trees", "2", "--depth", "3"]);
    assert_eq!(code(&out), 0);
    let out = run(&[
        "--out",
        dir.to_str().unwrap(),
        "verify",
        "--suite",
        "majorization",
        "--grid",
        "500",
    ]);
    assert_eq!(code(&out), 0);
}

#[test]
fn out_dir_and_report() {
    let dir = tempfile::tempdir().unwrap();
    write_outputs(dir.path());
    assert!(dir.path().join("simulate.json").exists());
    assert!(dir.path().join("trees.csv").exists());
    assert!(dir.path().join("verify.json").exists());

    let out = run(&["report", dir.path().to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("supermartingale"));
    assert!(text.contains("majorization"));
    assert!(text.lines().all(|l| !l.starts_with("FAIL")));
}

#[test]
fn report_exits_3_on_failure() {
    let dir = tempfile::tempdir().unwrap();
    write_outputs(dir.path());
    let path = dir.path().join("verify.json");
    let mut doc: Value = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
    doc["pass"] = Value::Bool(false);
    doc["reports"][0]["pass"] = Value::Bool(false);
    fs::write(&path, serde_json::to_string(&doc).unwrap()).unwrap();
    let out = run(&["report", path.to_str().unwrap()]);
    assert_eq!(code(&out), 3);
    assert!(String::from_utf8(out.stdout).unwrap().contains("FAIL"));
}

#[test]
fn dump_requires_out() {
    let out = run(&["verify", "--suite", "initial", "--dump"]);
    assert_eq!(code(&out), 2);
}

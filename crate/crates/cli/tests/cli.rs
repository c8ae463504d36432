use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_fpp-lab"))
}

fn write_config(dir: &Path, body: serde_json::Value) -> std::path::PathBuf {
    let path = dir.join("cfg.json");
    std::fs::write(&path, serde_json::to_string_pretty(&body).unwrap()).unwrap();
    path
}

fn base(dir: &Path) -> serde_json::Value {
    serde_json::json!({
        "experiment": "variance_scaling",
        "d": 2,
        "law": {"family": "two_point", "a": 1, "b": 2, "p": 0.5},
        "n_values": [4, 8],
        "replications": 20,
        "master_seed": 9,
        "out_path": dir.join("out.csv").to_string_lossy()
    })
}

fn run(cmd: &mut Command) -> Output {
    cmd.output().expect("binary runs")
}

#[test]
fn variance_run_writes_csv_and_manifest() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), base(dir.path()));
    let out = run(bin().args(["variance", "--config"]).arg(&cfg));
    assert!(out.status.code() == Some(0) || out.status.code() == Some(1), "{out:?}");
    let csv = std::fs::read_to_string(dir.path().join("out.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "experiment,n,statistic,value,std_err,reps,boundary_frac,seed");
    assert!(csv.contains("variance_scaling,8,var_log_n_over_n,"));
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("out.csv.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["config"]["master_seed"], 9);
    assert_eq!(manifest["experiments"], serde_json::json!(["variance_scaling"]));
}

#[test]
fn passing_checks_exit_zero() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), base(dir.path()));
    let out = run(bin().args(["entropy", "--config"]).arg(&cfg).args(["--set", "environments=5"]));
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn failed_checks_exit_one_and_are_listed() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), base(dir.path()));
    // p̂ cannot halve between n = 2 and n = 3 when every edge costs 1
    let out = run(bin()
        .args(["cheap-path", "--config"])
        .arg(&cfg)
        .args(["--set", r#"law={"family":"uniform","lo":1,"hi":1.0001}"#, "--set", "n_values=[2,3]", "--set", "a=2"]));
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("check.cheap_path_decreasing"));
}

#[test]
fn config_errors_exit_two() {
    let dir = TempDir::new().unwrap();
    let out = run(bin().args(["variance", "--config"]).arg(dir.path().join("missing.json")));
    assert_eq!(out.status.code(), Some(2));

    let mut body = base(dir.path());
    body["d"] = 1.into();
    let cfg = write_config(dir.path(), body);
    let out = run(bin().args(["variance", "--config"]).arg(&cfg));
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("d = 1"));

    let out = run(bin().args(["nonsense", "--config"]).arg(&cfg));
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn degenerate_law_is_rejected() {
    let dir = TempDir::new().unwrap();
    let mut body = base(dir.path());
    body["law"] = serde_json::json!({"family": "finite_atomic", "values": [0, 1], "probs": [0.6, 0.4]});
    let cfg = write_config(dir.path(), body);
    let out = run(bin().args(["geo-length", "--config"]).arg(&cfg));
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("p_c"));
}

#[test]
fn help_describes_the_schema() {
    let out = run(bin().arg("--help"));
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("pad_exponent"));
    assert!(text.contains("cheap-path"));
}

#[test]
fn overrides_and_flags_reach_the_config() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), base(dir.path()));
    let other = dir.path().join("other.csv");
    let out = run(bin()
        .args(["variance", "--config"])
        .arg(&cfg)
        .args(["--seed", "77", "--set", "n_values=[4]", "--out"])
        .arg(&other));
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(&other).unwrap();
    assert!(csv.lines().skip(1).all(|l| l.starts_with("variance_scaling,4,") && l.ends_with(",77")));
}

#[test]
fn output_is_identical_across_worker_counts() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), base(dir.path()));
    let mut outputs = Vec::new();
    for workers in ["1", "8"] {
        let path = dir.path().join(format!("w{workers}.csv"));
        let out = run(bin()
            .args(["geo-length", "--config"])
            .arg(&cfg)
            .arg("--out")
            .arg(&path)
            .env("WORKERS", workers));
        assert!(out.status.code().is_some_and(|c| c < 2), "{out:?}");
        outputs.push(std::fs::read(&path).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
}

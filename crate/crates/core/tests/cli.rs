//! End-to-end runs of the `polystab` binary.

use std::path::Path;
use std::process::{Command, Output};

fn polystab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_polystab"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

fn read(path: impl AsRef<Path>) -> String {
    std::fs::read_to_string(path).unwrap()
}

#[test]
fn cayley_defaults_pass_with_expected_exponent() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let o = polystab(&["cayley-decay", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let report: serde_json::Value = serde_json::from_str(&read(out.join("report.json"))).unwrap();
    assert_eq!(report["experiment_id"], "paper-example-cayley");
    assert_eq!(report["verdict"], "PASS");
    let exponent = report["fitted"]["exponent"].as_f64().unwrap();
    assert!((exponent + 1.0 / 3.0).abs() < 0.03, "{exponent}");
    assert_eq!(report["schema_version"], 1);
    assert_eq!(report["provenance"]["operator_hash"].as_str().unwrap().len(), 64);
    let csv = read(out.join("cayley_decay.csv"));
    assert!(csv.starts_with("n,value,argmax,truncation\n"));
    assert!(out.join("metadata.json").exists());
}

#[test]
fn same_config_gives_identical_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "cfg.json",
        r#"{"experiment_id":"guo-zwart","parameters":{"trials":20,"seed":3}}"#,
    );
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for out in [&a, &b] {
        let o = polystab(&["cayley-decay", "--config", &cfg, "--out", out.to_str().unwrap()]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    }
    assert_eq!(std::fs::read(a.join("report.json")).unwrap(), std::fs::read(b.join("report.json")).unwrap());
    assert_eq!(std::fs::read(a.join("trials.csv")).unwrap(), std::fs::read(b.join("trials.csv")).unwrap());

    let s1 = dir.path().join("s1");
    let s2 = dir.path().join("s2");
    for out in [&s1, &s2] {
        polystab(&["semigroup-decay", "--beta", "0.5", "--out", out.to_str().unwrap()]);
    }
    assert_eq!(read(s1.join("report.json")), read(s2.join("report.json")));
}

#[test]
fn flags_override_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "cfg.json",
        r#"{"experiment_id":"paper-example-semigroup","parameters":{"beta":1.0}}"#,
    );
    let out = dir.path().join("o");
    let o = polystab(&["semigroup-decay", "--config", &cfg, "--beta", "0.5", "--grid", "10,1000,20", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let report: serde_json::Value = serde_json::from_str(&read(out.join("report.json"))).unwrap();
    assert_eq!(report["provenance"]["parameters"]["beta"], 0.5);
    assert_eq!(report["provenance"]["parameters"]["grid"]["points"], 20);
    assert!((report["fitted"]["exponent"].as_f64().unwrap() + 0.5).abs() < 0.03);
}

#[test]
fn config_errors_exit_with_two_and_name_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let bad_operator = write(
        dir.path(),
        "bad_op.json",
        r#"{"experiment_id":"paper-example-semigroup","operator":{"type":"diagonal","formula":"paper-example","truncation":"many"}}"#,
    );
    let o = polystab(&["semigroup-decay", "--config", &bad_operator]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("operator.truncation"), "{}", String::from_utf8_lossy(&o.stderr));

    let typo = write(dir.path(), "typo.json", r#"{"experiment_id":"paper-example-semigroup","parameters":{"btea":1}}"#);
    let o = polystab(&["semigroup-decay", "--config", &typo]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("parameters.btea"));

    let wrong_family = write(dir.path(), "wrong.json", r#"{"experiment_id":"guo-zwart"}"#);
    assert_eq!(code(&polystab(&["lyapunov", "--config", &wrong_family])), 2);

    let bad_grid = polystab(&["cayley-decay", "--grid", "100,10,5"]);
    assert_eq!(code(&bad_grid), 2);

    let o = polystab(&["suite", "everything"]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("preset"));

    let missing = polystab(&["perturb", "--config", dir.path().join("absent.json").to_str().unwrap()]);
    assert_eq!(code(&missing), 1);
}

#[test]
fn failing_experiment_exits_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("scan");
    let o = polystab(&["lyapunov", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    let report: serde_json::Value = serde_json::from_str(&read(out.join("report.json"))).unwrap();
    assert_eq!(report["verdict"], "FAIL");

    let o = polystab(&["lyapunov", "--gammas", "0.25"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
}

#[test]
fn properties_suite_writes_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("suite");
    let o = polystab(&["suite", "properties", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let summary: serde_json::Value = serde_json::from_str(&read(out.join("summary.json"))).unwrap();
    let entries = summary["entries"].as_array().unwrap();
    assert_eq!(entries.len(), 7);
    for e in entries {
        let id = e["experiment_id"].as_str().unwrap();
        assert_eq!(e["verdict"], "PASS", "{id}");
        assert!(out.join(id).join("report.json").exists());
    }
}

#[test]
fn operator_file_overrides_default() {
    let dir = tempfile::tempdir().unwrap();
    let op = write(
        dir.path(),
        "op.json",
        r#"{"type":"diagonal","formula":"power-law","re_decay":2,"im_growth":1,"truncation":64}"#,
    );
    let out = dir.path().join("o");
    let o = polystab(&["semigroup-decay", "--operator", &op, "--alpha", "2", "--beta", "2", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let report: serde_json::Value = serde_json::from_str(&read(out.join("report.json"))).unwrap();
    assert_eq!(report["provenance"]["operator"]["formula"], "power-law");
}

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn modfold(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_modfold"))
        .args(args)
        .output()
        .expect("spawn modfold")
}

fn config(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, body).unwrap();
    p.to_string_lossy().into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn malformed_json_is_usage_error() {
    let d = tempfile::tempdir().unwrap();
    let c = config(d.path(), "c.json", "{ not json");
    let o = modfold(&["witness", "--config", &c, "--out", d.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
}

#[test]
fn unknown_field_reports_its_path() {
    let d = tempfile::tempdir().unwrap();
    let c = config(d.path(), "c.json", r#"{"alpha": 0.7, "lamda": 0.5}"#);
    let o = modfold(&["witness", "--config", &c, "--dry-run"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("lamda"), "{}", stderr(&o));
}

#[test]
fn out_of_range_value_names_the_field() {
    let d = tempfile::tempdir().unwrap();
    let c = config(d.path(), "c.json", r#"{"sizes": [32, 1]}"#);
    let o = modfold(&["prolate_spectrum", "--config", &c, "--dry-run"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("sizes[1]"), "{}", stderr(&o));
}

#[test]
fn kind_mismatch_is_usage_error() {
    let d = tempfile::tempdir().unwrap();
    let c = config(d.path(), "c.json", r#"{"kind": "decay_curve"}"#);
    let o = modfold(&["witness", "--config", &c, "--dry-run"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn missing_config_file_is_usage_error() {
    let o = modfold(&["witness", "--config", "/nonexistent/c.json", "--dry-run"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn unknown_subcommand_is_usage_error() {
    let o = modfold(&["frobnicate"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn exhausted_witness_search_is_numerical_failure() {
    let d = tempfile::tempdir().unwrap();
    let c = config(d.path(), "c.json", r#"{"alpha": 0.6, "n_max": 20}"#);
    let out = d.path().join("out");
    let o = modfold(&["witness", "--config", &c, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    assert!(stderr(&o).contains("witness search"), "{}", stderr(&o));
}

#[test]
fn dry_run_writes_nothing() {
    let d = tempfile::tempdir().unwrap();
    let out = d.path().join("out");
    for kind in ["decay_curve", "prolate_spectrum", "svp_compare", "witness", "unfold_demo", "density_scan"] {
        let c = config(d.path(), "c.json", "{}");
        let o = modfold(&[kind, "--config", &c, "--out", out.to_str().unwrap(), "--dry-run"]);
        assert_eq!(o.status.code(), Some(0), "{kind}: {}", stderr(&o));
        assert!(String::from_utf8_lossy(&o.stdout).contains("stage 1"));
    }
    assert!(!out.exists());
}

#[test]
fn kebab_case_alias_accepted() {
    let d = tempfile::tempdir().unwrap();
    let c = config(d.path(), "c.json", "{}");
    let o = modfold(&["decay-curve", "--config", &c, "--dry-run"]);
    assert_eq!(o.status.code(), Some(0));
}

fn artifacts(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.file_name().unwrap() != "manifest.json")
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
        .collect();
    v.sort();
    v
}

#[test]
fn repeated_runs_are_byte_identical() {
    let d = tempfile::tempdir().unwrap();
    let c = config(d.path(), "c.json", r#"{"trials": 20, "jitter": 0.1}"#);
    let runs: Vec<_> = (0..2)
        .map(|i| {
            let out = d.path().join(format!("run{i}"));
            let o = modfold(&["unfold_demo", "--config", &c, "--out", out.to_str().unwrap(), "--seed", "11"]);
            assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
            artifacts(&out)
        })
        .collect();
    assert_eq!(runs[0].len(), 2);
    assert_eq!(runs[0], runs[1]);
    let other = d.path().join("other");
    modfold(&["unfold_demo", "--config", &c, "--out", other.to_str().unwrap(), "--seed", "12"]);
    assert_ne!(artifacts(&other), runs[0]);
}

#[test]
fn unfold_demo_recovers_default_signal() {
    let d = tempfile::tempdir().unwrap();
    let c = config(d.path(), "c.json", "{}");
    let out = d.path().join("out");
    let o = modfold(&["unfold_demo", "--config", &c, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let rep: serde_json::Value = serde_json::from_slice(&fs::read(out.join("unfold_report.json")).unwrap()).unwrap();
    assert!(rep["relative_error"].as_f64().unwrap() < 1e-6);
    // the peak at 0 and its two neighbours at +-0.5 all exceed the threshold
    assert_eq!(rep["report"]["peak_set"].as_array().unwrap().len(), 3);
}

#[test]
fn plotdata_from_decay_curve() {
    let d = tempfile::tempdir().unwrap();
    let c = config(d.path(), "c.json", r#"{"n_max": 12, "panels": [4]}"#);
    let out = d.path().join("out");
    assert_eq!(modfold(&["decay_curve", "--config", &c, "--out", out.to_str().unwrap()]).status.code(), Some(0));
    let csv = out.join("decay.csv");
    let o = modfold(&["plotdata", "--csv", csv.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let plot: serde_json::Value = serde_json::from_slice(&fs::read(out.join("decay.plot.json")).unwrap()).unwrap();
    assert_eq!(plot["log_y"], true);
    assert_eq!(plot["series"].as_array().unwrap().len(), 2);
    assert_eq!(plot["x"]["values"].as_array().unwrap().len(), 12);
}

#[test]
fn plotdata_rejects_empty_csv() {
    let d = tempfile::tempdir().unwrap();
    let p = config(d.path(), "empty.csv", "");
    assert_eq!(modfold(&["plotdata", "--csv", &p]).status.code(), Some(2));
}

//! End-to-end runs of the `optomech` binary.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_optomech"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    assert!(
        out.status.success(),
        "status {:?}: {}",
        out.status,
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn header(csv: &str) -> Value {
    let line = csv.lines().next().unwrap();
    serde_json::from_str(line.strip_prefix("# ").expect("metadata line")).unwrap()
}

fn body(csv: &str) -> Vec<&str> {
    csv.lines().filter(|l| !l.starts_with('#')).collect()
}

fn column(csv: &str, name: &str) -> Vec<f64> {
    let rows = body(csv);
    let idx = rows[0].split(',').position(|c| c == name).unwrap();
    rows[1..]
        .iter()
        .map(|r| r.split(',').nth(idx).unwrap().parse().unwrap())
        .collect()
}

#[test]
fn config_errors_exit_with_2() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("bad.json"), r#"{"powr": 1e-3}"#).unwrap();
    let out = run(dir.path(), &["--config", "bad.json", "steady"]);
    assert_eq!(out.status.code(), Some(2));
    fs::write(dir.path().join("neg.json"), r#"{"mass": -1.0}"#).unwrap();
    let out = run(dir.path(), &["--config", "neg.json", "steady"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(dir.path(), &["steady", "--power", "geom:1:2"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn degenerate_branch_exits_with_3() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["steady", "--power", "1e6", "--g2", "1e-2"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn all_unstable_exits_with_4_and_leaves_no_output() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["--out", "r.csv", "response", "--power", "1", "--points", "5"]);
    assert_eq!(out.status.code(), Some(4));
    assert!(fs::read_dir(dir.path()).unwrap().next().is_none());
}

#[test]
fn failed_write_removes_earlier_files() {
    let dir = tempfile::tempdir().unwrap();
    // the second output path is a directory, so writing it fails
    fs::create_dir(dir.path().join("r_001.csv")).unwrap();
    let out = run(dir.path(), &["--out", "r.csv", "response", "--G", "0.2,0.4", "--points", "5"]);
    assert!(!out.status.success());
    assert!(!dir.path().join("r_000.csv").exists());
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("c.json"), r#"{"power": 2e-3, "g2": 1e-3}"#).unwrap();
    for args in [
        &["--config", "c.json", "steady"][..],
        &["--config", "c.json", "response", "--G", "0.2,0.6", "--points", "41", "--long"],
        &["--config", "c.json", "--workers", "3", "spectra", "--G", "lin:0.2:1:5", "--points", "41"],
        &["--config", "c.json", "variance", "--G", "0.4", "--points", "11"],
        &["--config", "c.json", "stability-map", "--power", "1e-3,1e-2", "--detuning0", "lin:-1:1:5"],
        &["--config", "c.json", "quadratic-sweep", "--g2", "geom:1e-6:1e-3:4", "--points", "41"],
    ] {
        let a = stdout(&run(dir.path(), args));
        let b = stdout(&run(dir.path(), args));
        assert_eq!(a, b, "{args:?}");
    }
}

#[test]
fn worker_count_does_not_change_output() {
    let dir = tempfile::tempdir().unwrap();
    let args = |w: &'static str| ["--workers", w, "variance", "--G", "lin:0.2:1:5", "--points", "11"];
    assert_eq!(stdout(&run(dir.path(), &args("1"))), stdout(&run(dir.path(), &args("4"))));
}

#[test]
fn timestamp_only_behind_flag() {
    let dir = tempfile::tempdir().unwrap();
    let plain = stdout(&run(dir.path(), &["steady"]));
    assert!(header(&plain).get("timestamp").is_none());
    let stamped = stdout(&run(dir.path(), &["--timestamp", "steady"]));
    assert!(header(&stamped).get("timestamp").is_some());
    assert_eq!(body(&plain), body(&stamped));
}

#[test]
fn metadata_params_round_trip_as_config() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("c.json"),
        r#"{"power": 3e-3, "detuning0": 5e6, "bath_temperature": 20.0, "g2": 1e-4}"#,
    )
    .unwrap();
    let args = ["spectra", "--points", "31"];
    let first = stdout(&run(dir.path(), &[&["--config", "c.json"][..], &args].concat()));
    let params = &header(&first)["params"];
    fs::write(dir.path().join("again.json"), params.to_string()).unwrap();
    let second = stdout(&run(dir.path(), &[&["--config", "again.json"][..], &args].concat()));
    assert_eq!(first, second);
}

#[test]
fn jsonl_mirrors_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv = stdout(&run(dir.path(), &["steady", "--power", "1e-3,1e-2"]));
    let jsonl = stdout(&run(dir.path(), &["--format", "jsonl", "steady", "--power", "1e-3,1e-2"]));
    let mut lines = jsonl.lines();
    let meta: Value = serde_json::from_str(lines.next().unwrap()).unwrap();
    assert_eq!(meta["meta"], header(&csv));
    let rows: Vec<Value> = lines.map(|l| serde_json::from_str(l).unwrap()).collect();
    let q = column(&csv, "q_s");
    assert_eq!(rows.len(), q.len());
    for (r, q) in rows.iter().zip(q) {
        assert_eq!(r["q_s"].as_f64().unwrap(), q);
    }
}

#[test]
fn separate_files_per_combination() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["--out", "r.csv", "response", "--G", "0.2,0.4,0.6", "--points", "5"]);
    stdout(&out);
    for i in 0..3 {
        let text = fs::read_to_string(dir.path().join(format!("r_{i:03}.csv"))).unwrap();
        assert_eq!(body(&text).len(), 6);
    }
    let out = run(dir.path(), &["--long", "--out", "long.csv", "response", "--G", "0.2,0.4,0.6", "--points", "5"]);
    stdout(&out);
    let text = fs::read_to_string(dir.path().join("long.csv")).unwrap();
    assert_eq!(body(&text).len(), 16);
}

#[test]
fn zero_coupling_response_is_bare() {
    let dir = tempfile::tempdir().unwrap();
    let csv = stdout(&run(dir.path(), &["response", "--G", "0", "--g2", "0", "--points", "101"]));
    for c in ["omega_eff_over_omegam", "gamma_eff_over_gammam"] {
        assert!(column(&csv, c).iter().all(|&v| v == 1.0), "{c}");
    }
}

#[test]
fn response_damping_ordered_in_coupling() {
    let dir = tempfile::tempdir().unwrap();
    let csv = stdout(&run(
        dir.path(),
        &["--long", "response", "--G", "0.2,0.4,0.6,0.8,1.0", "--points", "201"],
    ));
    let gamma = column(&csv, "gamma_eff_over_gammam");
    let curves: Vec<&[f64]> = gamma.chunks(201).collect();
    assert_eq!(curves.len(), 5);
    for pair in curves.windows(2) {
        assert!(pair[0].iter().zip(pair[1]).all(|(a, b)| b > a));
    }
}

#[test]
fn quadratic_sweep_reduces_modification() {
    let dir = tempfile::tempdir().unwrap();
    let csv = stdout(&run(dir.path(), &["quadratic-sweep", "--points", "201"]));
    let gamma = column(&csv, "gamma_eff_at_omegam_over_gammam");
    assert!(gamma.windows(2).all(|w| w[1] < w[0]), "{gamma:?}");
}

use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn randers(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_randers")).args(args).output().expect("binary runs")
}

fn summary(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout)
        .unwrap_or_else(|e| panic!("stdout is not JSON ({e}): {}", String::from_utf8_lossy(&out.stdout)))
}

fn assert_passes(args: &[&str]) -> Value {
    let out = randers(args);
    let json = summary(&out);
    assert_eq!(out.status.code(), Some(0), "{args:?}: {json:#}");
    assert_eq!(json["passed"], true);
    assert_eq!(json["failures"].as_array().unwrap().len(), 0);
    json
}

#[test]
fn closed_preset_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("closed.csv");
    let json = assert_passes(&["geodesic", "--fig1", "--out", csv.to_str().unwrap()]);
    assert_eq!(json["closedness"]["verdict"], "closed");
    assert!(json["closure"]["position"].as_f64().unwrap() < 1e-8);

    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("s,x1,x2,x3"));
    let first: Vec<f64> = lines.next().unwrap().split(',').map(|v| v.parse().unwrap()).collect();
    assert_eq!(first, vec![0.0, 1.0, 0.0, 0.0]);
    for line in lines {
        let row: Vec<f64> = line.split(',').map(|v| v.parse().unwrap()).collect();
        let r: f64 = row[1..].iter().map(|v| v * v).sum();
        assert!((r - 1.0).abs() < 1e-12);
    }
}

#[test]
fn open_preset_is_not_closed() {
    let json = assert_passes(&["geodesic", "--fig2"]);
    assert_eq!(json["closedness"]["verdict"], "non-closed");
    assert!(json["closure"]["min_return_distance"].as_f64().unwrap() > 1e-3);
}

#[test]
fn classify_reports_expectation_failures() {
    assert_passes(&["classify", "--fig1", "--expect", "closed"]);
    assert_passes(&["classify", "--abc", "0.2", "0", "0", "--expect", "closed"]);

    let out = randers(&["classify", "--abc", "0", "0.5", "0", "--expect", "non-closed"]);
    assert_eq!(out.status.code(), Some(1));
    let json = summary(&out);
    assert_eq!(json["passed"], false);
    assert_eq!(json["failures"].as_array().unwrap().len(), 1);
}

#[test]
fn focal_sets_match_predictions() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    assert_passes(&["focal", "--example", "g1", "--out", out]);
    assert!(dir.path().join("focal.ply").exists());
    assert_passes(&["focal", "--example", "g2", "--n", "4", "--p", "1", "--a", "0.3", "--format", "csv"]);
}

#[test]
fn verify_and_control() {
    let json = assert_passes(&["verify", "--example", "g2", "--n", "4", "--a", "0.3", "--samples", "40", "--control"]);
    assert!(json["maxA_dev"].as_f64().unwrap() < 2e-4);
    assert_eq!(json["samples"], 40);
    assert!(json["levels"].is_array());
}

#[test]
fn psi_round_trips() {
    assert_passes(&["psi", "--example", "g1", "--samples", "60", "--scan-points", "20000"]);
}

#[test]
fn paired_family_preset_writes_point_clouds() {
    let dir = tempfile::tempdir().unwrap();
    assert_passes(&["family", "--fig34", "--count", "30", "--out", dir.path().to_str().unwrap()]);
    for label in ["h", "fq"] {
        let text = std::fs::read_to_string(dir.path().join(format!("family-{label}.ply"))).unwrap();
        assert!(text.starts_with("ply\nformat ascii 1.0\n"));
        assert!(text.contains("property double t\n"));
    }
}

#[test]
fn output_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let sub = dir.path().join(name);
        let out = randers(&[
            "family",
            "--example",
            "g2",
            "--n",
            "3",
            "--count",
            "25",
            "--seed",
            "9",
            "--format",
            "csv",
            "--out",
            sub.to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(0));
        (out.stdout, read_dir_sorted(&sub))
    };
    let (a_stdout, a_files) = run("a");
    let (b_stdout, b_files) = run("b");
    let strip = |s: Vec<u8>| String::from_utf8(s).unwrap().replace("/a", "/x").replace("/b", "/x");
    assert_eq!(strip(a_stdout), strip(b_stdout));
    assert_eq!(a_files, b_files);
}

fn read_dir_sorted(dir: &Path) -> Vec<(String, String)> {
    let mut files: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let path = e.unwrap().path();
            (path.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read_to_string(&path).unwrap())
        })
        .collect();
    files.sort();
    files
}

#[test]
fn config_file_supplies_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(&cfg, r#"{"abc": [0.5, 0.0, 0.0], "seed": 3}"#).unwrap();
    let json = assert_passes(&["classify", "--config", cfg.to_str().unwrap(), "--expect", "closed"]);
    let period = json["period"].as_f64().unwrap();
    assert!((period - 4.0 * std::f64::consts::PI).abs() < 1e-12);

    let custom = dir.path().join("custom.json");
    std::fs::write(
        &custom,
        r#"{"polynomial": {"g": 1, "terms": [{"exponents": [0, 1, 0], "coeff": 1.0}]},
            "q": {"n": 2, "entries": [[0, 0, 0.4], [0, 0, 0], [-0.4, 0, 0]]},
            "samples": 30}"#,
    )
    .unwrap();
    assert_passes(&["verify", "--config", custom.to_str().unwrap()]);
}

#[test]
fn bad_input_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    std::fs::write(&cfg, r#"{"unknown_field": 1}"#).unwrap();
    let out = randers(&["classify", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));

    let out = randers(&["classify", "--abc", "0", "2", "0"]);
    assert_eq!(out.status.code(), Some(2));
}

//! End-to-end runs of the `maass-lab` binary.

use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_maass-lab"));
    cmd.env_remove("MAASSLAB_SEED");
    cmd
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", stdout(o)))
}

/// Data rows of a CSV report as (case, pass) pairs, after checking the header.
fn report_rows(text: &str) -> Vec<(String, String, bool)> {
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("# maass-lab report v1"));
    let body: String = lines.map(|l| format!("{l}\n")).collect();
    let mut reader = csv::Reader::from_reader(body.as_bytes());
    let head = reader.headers().unwrap().clone();
    assert_eq!(
        head.iter().collect::<Vec<_>>(),
        [
            "suite",
            "case",
            "k",
            "nu",
            "h",
            "inputs",
            "residual",
            "tolerance",
            "richardson_ratio",
            "pass",
            "wall_ms"
        ]
    );
    reader
        .records()
        .map(|r| {
            let r = r.unwrap();
            (r[0].to_string(), r[1].to_string(), &r[9] == "true")
        })
        .collect()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

const ETA_G0_2: &str =
    r#"{"group": {"kind": "gamma0", "level": 2}, "weight": [0.5, 0.0], "kind": "eta"}"#;

const TWO_TERMS: &str = r#"{
    "cusp_index": 0, "kappa": 0.0, "nu": [0.0, 2.0], "k": [0.0, 0.0],
    "A": {"1": [1.0, 0.0], "2": [0.5, -0.25]}, "M": 0.0
}"#;

#[test]
fn subgroup_info_lists_cusps() {
    let o = run(&["subgroup", "info", "--kind", "gamma0", "--level", "6"]);
    assert!(o.status.success());
    let v = json(&o);
    assert_eq!(v["index"], 12);
    let cusps = v["cusps"].as_array().unwrap();
    assert_eq!(cusps.len(), 4);
    assert_eq!(cusps[0]["q"], "inf");
    assert_eq!(
        cusps
            .iter()
            .map(|c| c["width"].as_u64().unwrap())
            .sum::<u64>(),
        12
    );
}

#[test]
fn whittaker_eval_reports_value_error_and_method() {
    let o = run(&[
        "whittaker",
        "eval",
        "--k",
        "0",
        "--nu",
        "0.5",
        "--y",
        "3",
        "--normalized",
    ]);
    assert!(o.status.success());
    let v = json(&o);
    assert!((v["value"][0].as_f64().unwrap() - (-1.5f64).exp()).abs() < 1e-14);
    assert_eq!(v["value"][1].as_f64().unwrap(), 0.0);
    assert!(v["error"].as_f64().unwrap() < 1e-12);
    assert!(v["method"].is_string());
}

#[test]
fn verify_whittaker_passes_and_is_sorted() {
    let o = run(&["verify", "whittaker"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = report_rows(&stdout(&o));
    assert!(rows.iter().all(|r| r.0 == "whittaker" && r.2));
    let keys: Vec<_> = rows.iter().map(|r| (r.0.clone(), r.1.clone())).collect();
    let mut sorted = keys.clone();
    sorted.sort();
    assert_eq!(keys, sorted);
}

#[test]
fn reports_do_not_depend_on_the_worker_count() {
    let one = run(&["verify", "multiplier", "--jobs", "1"]);
    let four = run(&["verify", "multiplier", "--jobs", "4"]);
    assert!(one.status.success() && four.status.success());
    assert_eq!(one.stdout, four.stdout);
}

#[test]
fn the_seed_moves_the_samples() {
    let default = run(&["verify", "vvforms"]);
    let other = bin()
        .args(["verify", "vvforms"])
        .env("MAASSLAB_SEED", "7")
        .output()
        .unwrap();
    assert!(default.status.success() && other.status.success());
    assert_ne!(default.stdout, other.stdout);
    let bad = bin()
        .args(["verify", "vvforms"])
        .env("MAASSLAB_SEED", "seven")
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn timings_fill_the_last_column() {
    let o = run(&["verify", "multiplier", "--level", "2", "--timings"]);
    let text = stdout(&o);
    let body = text.lines().nth(2).unwrap();
    assert!(!body.ends_with(','), "{body}");
    let plain = stdout(&run(&["verify", "multiplier", "--level", "2"]));
    assert!(plain.lines().nth(2).unwrap().ends_with(','));
}

#[test]
fn json_report_and_out_file() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("report.json");
    let o = run(&[
        "verify",
        "multiplier",
        "--level",
        "4",
        "--format",
        "json",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    assert!(o.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(out).unwrap()).unwrap();
    assert_eq!(v["version"], "maass-lab report v1");
    let rows = v["rows"].as_array().unwrap();
    assert!(rows
        .iter()
        .all(|r| r["pass"] == true && r["tolerance"].as_f64().unwrap() >= 0.0));
}

#[test]
fn tol_only_tightens_exact_rows() {
    let o = run(&[
        "verify",
        "operators",
        "--suite",
        "factorization",
        "--tol",
        "1e-30",
    ]);
    // finite-difference rows keep their own tolerance
    assert!(o.status.success());
    let o = run(&["verify", "multiplier", "--level", "2", "--tol", "1e-30"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn configuration_errors_exit_2() {
    for args in [
        &["verify", "all", "--multiplier", "/nonexistent/file.json"][..],
        &["verify", "all", "--h", "0.5"],
        &["verify", "all", "--tol", "-1"],
        &["verify", "all", "--jobs", "0"],
        &["verify", "forms", "--R", "2"],
        &["verify", "everything"],
        &["subgroup", "info", "--kind", "gamma7"],
        &["whittaker", "eval", "--y", "1"],
    ] {
        let o = run(args);
        assert_eq!(
            o.status.code(),
            Some(2),
            "{args:?}: {}",
            String::from_utf8_lossy(&o.stderr)
        );
    }
}

#[test]
fn multiplier_file_adds_rows() {
    let dir = TempDir::new().unwrap();
    let path = write(dir.path(), "eta.json", ETA_G0_2);
    let o = run(&[
        "verify",
        "multiplier",
        "--level",
        "2",
        "--multiplier",
        &path,
    ]);
    assert!(o.status.success());
    let rows = report_rows(&stdout(&o));
    assert!(rows.iter().any(|r| r.1 == "consistency/file/Gamma0(2)"));

    let broken = write(
        dir.path(),
        "broken.json",
        r#"{"group": {"kind": "gamma0", "level": 2}, "kind": "nope"}"#,
    );
    assert_eq!(
        run(&["verify", "multiplier", "--multiplier", &broken])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn mutation_fails_exactly_one_row() {
    let o = run(&[
        "verify",
        "operators",
        "--suite",
        "basis",
        "--mutate-basis-rule",
    ]);
    assert_eq!(o.status.code(), Some(1));
    let failed: Vec<_> = report_rows(&stdout(&o))
        .into_iter()
        .filter(|r| !r.2)
        .collect();
    assert_eq!(failed.len(), 1);
    assert_eq!(failed[0].1, "basis/W/n>0/up");
    assert!(String::from_utf8_lossy(&o.stderr).contains("operators/basis/W/n>0/up"));
}

#[test]
fn form_commands() {
    let dir = TempDir::new().unwrap();
    let spec = write(dir.path(), "two.json", TWO_TERMS);
    let o = run(&[
        "form",
        "eval-expansion",
        "--spec",
        &spec,
        "--z",
        "0.1,1.2",
        "--format",
        "json",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v = json(&o);
    assert_eq!(v["cusp"], "inf");
    assert!(v["truncation_error"].as_f64().unwrap() >= 0.0);
    assert!(v["value"][0].as_f64().unwrap().is_finite());

    let csv_out = stdout(&run(&[
        "form",
        "eval-expansion",
        "--spec",
        &spec,
        "--z",
        "0.1,1.2",
    ]));
    assert!(csv_out.lines().next().unwrap().contains("truncation_error"));

    for which in ["transformation", "growth", "eigen"] {
        let o = run(&["form", "verify", "--which", which, "--spec", &spec]);
        assert!(
            o.status.success(),
            "{which}: {}",
            String::from_utf8_lossy(&o.stderr)
        );
        let rows = report_rows(&stdout(&o));
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].1, which);
    }

    let o = run(&[
        "form",
        "eisenstein",
        "--z",
        "0,1",
        "--R",
        "60",
        "--format",
        "json",
    ]);
    assert!(o.status.success());
    let v = json(&o);
    assert!(v["tail_bound"].as_f64().unwrap() > 0.0 && v["terms"].as_u64().unwrap() > 100);
    let o = run(&["form", "eisenstein", "--z", "0,1", "--nu", "0.3"]);
    assert_eq!(o.status.code(), Some(2), "divergent series must be refused");
}

#[test]
fn vv_commands() {
    let dir = TempDir::new().unwrap();
    let eta = write(dir.path(), "eta.json", ETA_G0_2);
    let o = run(&[
        "vv",
        "induce",
        "--multiplier",
        &eta,
        "--element",
        "S T",
        "--z",
        "0.2,1.1",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v = json(&o);
    assert_eq!(v["dimension"], 3);
    let m = v["matrix"].as_array().unwrap();
    for row in m {
        let nonzero = row
            .as_array()
            .unwrap()
            .iter()
            .filter(|e| e[0].as_f64().unwrap().hypot(e[1].as_f64().unwrap()) > 1e-12)
            .count();
        assert_eq!(nonzero, 1);
    }

    let o = run(&["vv", "roundtrip"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = report_rows(&stdout(&o));
    assert_eq!(rows.len(), 3);

    // a cusp expansion only speaks for the neighbourhood of its cusp; the coset slashes leave it
    let spec = write(dir.path(), "two.json", TWO_TERMS);
    let o = run(&["vv", "roundtrip", "--spec", &spec]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("cusp neighbourhood"));
}

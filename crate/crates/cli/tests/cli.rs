use std::process::{Command, Output};

use nla_core::optimizer::{optimize_epr, ConstraintSet};
use serde_json::Value;

fn nla(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nla"))
        .args(args)
        .env_remove("SOURCE_DATE_EPOCH")
        .env_remove("NLA_JOBS")
        .output()
        .unwrap()
}

fn stdout(args: &[&str]) -> String {
    let out = nla(args);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

/// Data rows of a CSV document, split into fields.
fn rows(csv: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut lines = csv.lines();
    assert!(lines.next().unwrap().starts_with("# manifest: {"));
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let body = lines
        .map(|l| l.split(',').map(String::from).collect())
        .collect();
    (header, body)
}

fn num(s: &str) -> f64 {
    s.parse().unwrap()
}

#[test]
fn coherent_vacuum_probability_is_gain_power() {
    let (header, body) = rows(&stdout(&[
        "coherent",
        "--alpha",
        "0",
        "--n",
        "1..3",
        "--g-steps",
        "5",
    ]));
    assert_eq!(header, ["g", "N", "P", "F"]);
    assert_eq!(body.len(), 15);
    for r in body {
        let (g, n, p) = (num(&r[0]), num(&r[1]), num(&r[2]));
        assert!((p - g.powf(-2.0 * n)).abs() < 1e-14);
    }
}

#[test]
fn coherent_auto_cutoff_stays_at_one_for_small_amplitude() {
    let text = stdout(&[
        "coherent",
        "--alpha",
        "0.1",
        "--fmin",
        "0.99",
        "--g-max",
        "3",
        "--g-steps",
        "200",
    ]);
    let (_, body) = rows(&text);
    assert_eq!(body.len(), 200);
    assert!(body.iter().all(|r| r[1] == "1"));
}

#[test]
fn epr_reports_input_squeezing() {
    let (header, body) = rows(&stdout(&[
        "epr",
        "--chi-prime",
        "0.5",
        "--eta",
        "1",
        "--g",
        "3",
    ]));
    assert_eq!(header, ["g", "N", "chi_in", "P", "F_lower", "epsilon"]);
    assert!((num(&body[0][2]) - 0.5 / 3.0).abs() < 1e-14);
}

#[test]
fn epr_baselines() {
    let text = stdout(&[
        "epr",
        "--chi-prime",
        "0.5",
        "--eta",
        "0.25",
        "--with-baselines",
        "--g-steps",
        "3",
    ]);
    let (header, body) = rows(&text);
    assert_eq!(
        &header[6..],
        ["eps_unamplified", "eps_input", "eps_infinite"]
    );
    for r in body {
        assert_eq!(num(&r[8]), 0.5625);
        assert!((num(&r[6]) - 0.81).abs() < 1e-14);
    }
}

#[test]
fn optimize_single_point_matches_library() {
    let text = stdout(&[
        "optimize",
        "--chi-prime",
        "0.5",
        "--pmin",
        "0.001",
        "--eta-grid",
        "1",
        "--format",
        "json",
    ]);
    let doc: Value = serde_json::from_str(&text).unwrap();
    let row = &doc["rows"][0];
    let r = optimize_epr(&ConstraintSet::new(0.99, 0.001, 0.5, 1.0).unwrap()).unwrap();
    assert_eq!(row["N"].as_u64().unwrap(), r.n_star as u64);
    assert_eq!(row["g"].as_f64().unwrap(), r.g_star);
    assert_eq!(row["epsilon"].as_f64().unwrap(), r.epsilon);
    assert_eq!(row["binding"], r.binding.as_str());
    assert!(row["error"].is_null());
}

#[test]
fn json_manifest_is_versioned() {
    let doc: Value = serde_json::from_str(&stdout(&["validate", "--format", "json"])).unwrap();
    assert_eq!(doc["manifest"]["schema_version"], 1);
    assert_eq!(doc["manifest"]["command"], "validate");
    assert!(doc["manifest"]["timestamp"].is_null());
    assert_eq!(doc["columns"][0], "check");
}

#[test]
fn source_date_epoch_sets_timestamp() {
    let out = Command::new(env!("CARGO_BIN_EXE_nla"))
        .args(["coherent", "--alpha", "0.5", "--g-steps", "2"])
        .env("SOURCE_DATE_EPOCH", "1700000000")
        .output()
        .unwrap();
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text
        .lines()
        .next()
        .unwrap()
        .contains("\"timestamp\":\"2023-11-14T22:13:20+00:00\""));
}

#[test]
fn out_flag_writes_file_and_jobs_do_not_change_output() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sweep.csv");
    let args = [
        "optimize",
        "--chi-prime",
        "0.8",
        "--eta-grid",
        "0.2:1:5",
        "--pmin",
        "0.01",
    ];
    let mut with_out: Vec<&str> = args.to_vec();
    with_out.extend(["--out", path.to_str().unwrap(), "--jobs", "1"]);
    assert!(nla(&with_out).status.success());
    let serial = std::fs::read_to_string(&path).unwrap();
    let parallel = Command::new(env!("CARGO_BIN_EXE_nla"))
        .args(args)
        .env("NLA_JOBS", "8")
        .env_remove("SOURCE_DATE_EPOCH")
        .output()
        .unwrap();
    assert_eq!(serial, String::from_utf8(parallel.stdout).unwrap());
}

#[test]
fn csv_floats_carry_fifteen_significant_digits() {
    let (_, body) = rows(&stdout(&["coherent", "--alpha", "0.8", "--g-steps", "3"]));
    for field in [&body[1][0], &body[1][2], &body[1][3]] {
        let mantissa = field.split('e').next().unwrap();
        assert_eq!(
            mantissa.trim_start_matches('-').replace('.', "").len(),
            15,
            "{field}"
        );
    }
}

#[test]
fn log_grid_is_geometric() {
    let (_, body) = rows(&stdout(&[
        "coherent",
        "--alpha",
        "0.3",
        "--g-max",
        "100",
        "--g-steps",
        "3",
        "--log",
    ]));
    assert!((num(&body[1][0]) - 10.0).abs() < 1e-12);
}

#[test]
fn exit_codes() {
    assert_eq!(nla(&["coherent"]).status.code(), Some(2));
    assert_eq!(nla(&["coherent", "--alpha=-1"]).status.code(), Some(2));
    assert_eq!(
        nla(&["coherent", "--alpha", "1", "--g-min", "3", "--g-max", "2"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        nla(&["optimize", "--chi-prime", "0.5", "--eta-grid", "1,0.5"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        nla(&["epr", "--chi-prime", "1.5", "--eta", "0.5"])
            .status
            .code(),
        Some(2)
    );
    // Mean photon number 9e4 after gain: no cutoff up to the search cap suffices.
    let capped = [
        "coherent",
        "--alpha",
        "30",
        "--fmin",
        "0.99",
        "--g-min",
        "10",
        "--g-max",
        "10",
        "--g-steps",
        "1",
    ];
    assert_eq!(nla(&capped).status.code(), Some(3));
    assert_eq!(nla(&["validate", "--tol", "1e-300"]).status.code(), Some(1));
    assert_eq!(nla(&["validate", "--tol", "1e-3"]).status.code(), Some(0));
}

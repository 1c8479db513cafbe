use nla_wasm::{coherent_curves, epr_curves, optimize_sweep};
use serde_json::Value;

fn parse(s: String) -> Value {
    serde_json::from_str(&s).unwrap()
}

#[test]
fn coherent_curves_shape_and_vacuum_limit() {
    let v = parse(coherent_curves(0.0, 1.0, 3.0, 5, 2));
    assert_eq!(v["g"].as_array().unwrap().len(), 5);
    let series = v["series"].as_array().unwrap();
    assert_eq!(series.len(), 2);
    let p = series[1]["p"][4].as_f64().unwrap();
    assert!((p - 3f64.powi(-4)).abs() < 1e-15);
    assert!(v.get("baselines").is_none());
}

#[test]
fn epr_curves_include_baselines() {
    let v = parse(epr_curves(0.5, 0.25, 1.0, 4.0, 31, 3));
    assert_eq!(v["baselines"]["infinite_squeezing"], 0.5625);
    let eps = v["series"][0]["epsilon"].as_array().unwrap();
    assert_eq!(eps.len(), 31);
    assert!((eps[0].as_f64().unwrap() - 0.81).abs() < 1e-12);
}

#[test]
fn optimize_sweep_rows() {
    let v = parse(optimize_sweep(0.5, 0.99, 0.01, 4));
    let rows = v.as_array().unwrap();
    assert_eq!(rows.len(), 4);
    assert_eq!(rows[3]["eta"], 1.0);
    for r in rows {
        assert!(r["error"].is_null());
        assert!(r["epsilon"].as_f64().unwrap() <= r["unamplified"].as_f64().unwrap() + 1e-12);
    }
}

#[test]
fn bad_input_comes_back_as_error_object() {
    assert!(parse(coherent_curves(0.5, 3.0, 1.0, 5, 2))["error"].is_string());
    assert!(parse(epr_curves(1.5, 0.5, 1.0, 2.0, 5, 1))["error"].is_string());
    assert!(parse(optimize_sweep(0.5, 1.5, 0.01, 4))["error"].is_string());
    assert!(parse(coherent_curves(0.5, 1.0, 2.0, 5, 0))["error"].is_string());
}

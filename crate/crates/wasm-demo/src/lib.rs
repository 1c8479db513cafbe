//! Browser bindings. Every export returns a JSON string; failures come back
//! as `{"error": "..."}` so the page never has to catch a thrown value.

use nla_core::coherent::evaluate_coherent;
use nla_core::epr::{criterion, evaluate_at_target};
use nla_core::optimizer::{sweep_point, ConstraintSet};
use nla_core::{AmplifierSpec, NlaError};
use serde::Serialize;
use wasm_bindgen::prelude::*;

const MAX_POINTS: usize = 2000;

#[derive(Serialize)]
struct Series {
    n: u32,
    p: Vec<f64>,
    f: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    epsilon: Option<Vec<f64>>,
}

#[derive(Serialize)]
struct Curves {
    g: Vec<f64>,
    series: Vec<Series>,
    #[serde(skip_serializing_if = "Option::is_none")]
    baselines: Option<Baselines>,
}

#[derive(Serialize)]
struct Baselines {
    unamplified: f64,
    infinite_squeezing: f64,
}

#[derive(Serialize)]
struct SweepRow {
    eta: f64,
    n_star: Option<u32>,
    g_star: Option<f64>,
    epsilon: Option<f64>,
    binding: Option<&'static str>,
    unamplified: f64,
    infinite_squeezing: f64,
    error: Option<String>,
}

fn to_json<T: Serialize>(result: Result<T, NlaError>) -> String {
    match result {
        Ok(v) => serde_json::to_string(&v).unwrap_or_else(|e| error_json(&e.to_string())),
        Err(e) => error_json(&e.to_string()),
    }
}

fn error_json(msg: &str) -> String {
    serde_json::json!({ "error": msg }).to_string()
}

fn linspace(min: f64, max: f64, steps: usize) -> Result<Vec<f64>, NlaError> {
    if !(min.is_finite() && max.is_finite() && min <= max) || !(2..=MAX_POINTS).contains(&steps) {
        return Err(NlaError::Domain(format!(
            "need finite min <= max and 2..={MAX_POINTS} points"
        )));
    }
    let last = (steps - 1) as f64;
    Ok((0..steps)
        .map(|i| min + (max - min) * i as f64 / last)
        .collect())
}

fn cutoffs(n_max: u32) -> Result<std::ops::RangeInclusive<u32>, NlaError> {
    if !(1..=12).contains(&n_max) {
        return Err(NlaError::Domain("cutoff count must lie in 1..=12".into()));
    }
    Ok(1..=n_max)
}

/// `P` and `F` against gain for a coherent input, one series per cutoff
/// `1..=n_max`.
#[wasm_bindgen]
pub fn coherent_curves(alpha: f64, g_min: f64, g_max: f64, steps: usize, n_max: u32) -> String {
    to_json((|| {
        let g = linspace(g_min, g_max, steps)?;
        let series = cutoffs(n_max)?
            .map(|n| {
                let rows = g
                    .iter()
                    .map(|&gi| evaluate_coherent(alpha, &AmplifierSpec::new(gi, n)?))
                    .collect::<Result<Vec<_>, _>>()?;
                Ok(Series {
                    n,
                    p: rows.iter().map(|r| r.p_success).collect(),
                    f: rows.iter().map(|r| r.fidelity).collect(),
                    epsilon: None,
                })
            })
            .collect::<Result<Vec<_>, NlaError>>()?;
        Ok(Curves {
            g,
            series,
            baselines: None,
        })
    })())
}

/// `P`, fidelity bound and EPR criterion against gain at fixed target
/// squeezing, with the two reference criteria.
#[wasm_bindgen]
pub fn epr_curves(
    chi_prime: f64,
    eta: f64,
    g_min: f64,
    g_max: f64,
    steps: usize,
    n_max: u32,
) -> String {
    to_json((|| {
        let g = linspace(g_min.max(1.0), g_max, steps)?;
        let series = cutoffs(n_max)?
            .map(|n| {
                let rows = g
                    .iter()
                    .map(|&gi| evaluate_at_target(chi_prime, eta, &AmplifierSpec::new(gi, n)?))
                    .collect::<Result<Vec<_>, _>>()?;
                Ok(Series {
                    n,
                    p: rows.iter().map(|r| r.p_success).collect(),
                    f: rows.iter().map(|r| r.fidelity_lower_bound).collect(),
                    epsilon: Some(rows.iter().map(|r| r.epsilon_epr).collect()),
                })
            })
            .collect::<Result<Vec<_>, NlaError>>()?;
        Ok(Curves {
            g,
            series,
            baselines: Some(Baselines {
                unamplified: criterion(chi_prime, eta),
                infinite_squeezing: (1.0 - eta) * (1.0 - eta),
            }),
        })
    })())
}

/// Optimal criterion, cutoff and gain on `steps` transmissions spread over
/// `(0, 1]`.
#[wasm_bindgen]
pub fn optimize_sweep(chi_prime: f64, f_min: f64, p_min: f64, steps: usize) -> String {
    to_json((|| {
        if !(2..=400).contains(&steps) {
            return Err(NlaError::Domain("sweep needs 2..=400 points".into()));
        }
        let template = ConstraintSet::new(f_min, p_min, chi_prime, 1.0)?;
        Ok((1..=steps)
            .map(|k| {
                let pt = sweep_point(&template, k as f64 / steps as f64);
                let r = pt.result;
                SweepRow {
                    eta: pt.eta,
                    n_star: r.map(|r| r.n_star),
                    g_star: r.map(|r| r.g_star),
                    epsilon: r.map(|r| r.epsilon),
                    binding: r.map(|r| r.binding.as_str()),
                    unamplified: pt.baseline_unamplified,
                    infinite_squeezing: pt.baseline_infinite_squeezing,
                    error: pt.error,
                }
            })
            .collect::<Vec<_>>())
    })())
}

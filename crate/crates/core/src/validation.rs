//! Self-check suites: operator identities, and every closed form against the
//! brute-force [`oracle`](crate::oracle).

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::coherent::{fidelity_coherent, prob_coherent};
use crate::epr::{chi_for_target, evaluate_at_target, fidelity_prob_product, prob_epr};
use crate::error::Result;
use crate::fock::{
    build_joint_unitary, hamiltonian_reproduction_error, make_mf, make_ms, verify_n1_decomposition,
    AmplifierSpec,
};
use crate::oracle::{oracle_coherent, oracle_epr, oracle_transform_fidelity, OracleConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Grid {
    Small,
    Full,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub max_error: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub cases: usize,
    pub elapsed_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub grid: Grid,
    pub checks: Vec<CheckResult>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

struct Grids {
    gains: Vec<f64>,
    coherent_alpha: Vec<f64>,
    coherent_gain: Vec<f64>,
    coherent_n: Vec<u32>,
    epr_chi_prime: Vec<f64>,
    epr_eta: Vec<f64>,
    epr_gain: Vec<f64>,
    epr_n: Vec<u32>,
}

impl Grids {
    fn for_grid(grid: Grid) -> Self {
        match grid {
            Grid::Full => Grids {
                gains: vec![1.0, 1.5, 2.0, 3.0],
                coherent_alpha: vec![0.1, 0.3, 0.8, 1.5],
                coherent_gain: vec![1.0, 1.5, 2.0, 3.0, 4.0],
                coherent_n: (1..=5).collect(),
                epr_chi_prime: vec![0.3, 0.5, 0.8],
                epr_eta: vec![0.1, 0.3, 0.7, 1.0],
                epr_gain: vec![1.0, 1.5, 2.5, 4.0],
                epr_n: (1..=4).collect(),
            },
            Grid::Small => Grids {
                gains: vec![1.0, 2.0],
                coherent_alpha: vec![0.3, 1.5],
                coherent_gain: vec![1.5, 4.0],
                coherent_n: vec![1, 3],
                epr_chi_prime: vec![0.3, 0.8],
                epr_eta: vec![0.3, 1.0],
                epr_gain: vec![1.5, 4.0],
                epr_n: vec![1, 3],
            },
        }
    }
}

fn rel_err(value: f64, reference: f64) -> f64 {
    ((value - reference) / reference).abs()
}

fn check(
    name: &str,
    tolerance: f64,
    body: impl FnOnce() -> Result<(f64, usize)>,
) -> Result<CheckResult> {
    let start = Instant::now();
    let (max_error, cases) = body()?;
    Ok(CheckResult {
        name: name.to_string(),
        max_error,
        tolerance,
        passed: max_error <= tolerance,
        cases,
        elapsed_ms: start.elapsed().as_secs_f64() * 1e3,
    })
}

/// Runs every suite. `tol` replaces each check's default tolerance.
pub fn run_validation(grid: Grid, tol: Option<f64>) -> Result<ValidationReport> {
    let gr = Grids::for_grid(grid);
    let t = |default: f64| tol.unwrap_or(default);
    let operator_specs = || {
        gr.gains
            .iter()
            .flat_map(|&g| (0..=3).map(move |n| AmplifierSpec::new(g, n)))
    };
    let mut checks = Vec::new();

    checks.push(check("completeness", t(1e-12), || {
        let (mut worst, mut cases) = (0.0f64, 0);
        for spec in operator_specs() {
            let spec = spec?;
            let (ms, mf) = (make_ms(&spec, 20)?, make_mf(&spec, 20)?);
            for (s, f) in ms.entries().iter().zip(mf.entries()) {
                worst = worst.max((s * s + f * f - 1.0).abs());
            }
            cases += 1;
        }
        Ok((worst, cases))
    })?);

    checks.push(check("dilation_unitarity", t(1e-12), || {
        let (mut worst, mut cases) = (0.0f64, 0);
        for spec in operator_specs() {
            worst = worst.max(build_joint_unitary(&spec?, 20)?.orthogonality_error());
            cases += 1;
        }
        Ok((worst, cases))
    })?);

    checks.push(check("n1_decomposition", t(1e-12), || {
        let gains = [1.0, 2.0, 10.0];
        let worst = gains
            .iter()
            .map(|&g| verify_n1_decomposition(g))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .fold(0.0, f64::max);
        Ok((worst, gains.len()))
    })?);

    checks.push(check("hamiltonian_generation", t(1e-12), || {
        let (mut worst, mut cases) = (0.0f64, 0);
        for spec in operator_specs() {
            worst = worst.max(hamiltonian_reproduction_error(&spec?, 20)?);
            cases += 1;
        }
        Ok((worst, cases))
    })?);

    checks.push(check("coherent_vs_oracle", t(1e-9), || {
        let cfg = OracleConfig::new(60);
        let (mut worst, mut cases) = (0.0f64, 0);
        for &alpha in &gr.coherent_alpha {
            for &g in &gr.coherent_gain {
                for &n in &gr.coherent_n {
                    let spec = AmplifierSpec::new(g, n)?;
                    let o = oracle_coherent(alpha, &spec, &cfg)?;
                    worst = worst
                        .max(rel_err(prob_coherent(alpha, &spec)?, o.p))
                        .max(rel_err(fidelity_coherent(alpha, &spec)?, o.f));
                    cases += 1;
                }
            }
        }
        Ok((worst, cases))
    })?);

    checks.push(check("coherent_low_amplitude", t(1e-6), || {
        let gains = [1.5, 2.0, 3.0];
        let mut worst = 0.0f64;
        for &g in &gains {
            let p = prob_coherent(1e-4, &AmplifierSpec::new(g, 1)?)?;
            worst = worst.max((p - 1.0 / (g * g)).abs());
        }
        Ok((worst, gains.len()))
    })?);

    checks.push(check("epr_transform_identity", t(1e-10), || {
        let (mut worst, mut cases) = (0.0f64, 0);
        for chi in [0.2, 0.5] {
            for eta in [0.25, 0.7] {
                for g in [1.5, 2.5] {
                    worst = worst.max(1.0 - oracle_transform_fidelity(chi, eta, g, 60)?);
                    cases += 1;
                }
            }
        }
        Ok((worst, cases))
    })?);

    let epr_cases = || {
        let mut v = Vec::new();
        for &cp in &gr.epr_chi_prime {
            for &eta in &gr.epr_eta {
                for &g in &gr.epr_gain {
                    for &n in &gr.epr_n {
                        v.push((cp, eta, g, n));
                    }
                }
            }
        }
        v
    };

    checks.push(check("epr_vs_oracle", t(1e-8), || {
        let cfg = OracleConfig::new(80);
        let cases = epr_cases();
        let mut worst = 0.0f64;
        for &(cp, eta, g, n) in &cases {
            let spec = AmplifierSpec::new(g, n)?;
            let chi = chi_for_target(cp, eta, g)?;
            let o = oracle_epr(chi, eta, &spec, &cfg)?;
            worst = worst
                .max(rel_err(prob_epr(chi, eta, &spec)?, o.p))
                .max(rel_err(fidelity_prob_product(chi, eta, &spec)?, o.f * o.p));
        }
        Ok((worst, cases.len()))
    })?);

    checks.push(check("epr_fidelity_floor", t(1e-9), || {
        let cases = epr_cases();
        let mut worst = 0.0f64;
        for &(cp, eta, g, n) in &cases {
            let r = evaluate_at_target(cp, eta, &AmplifierSpec::new(g, n)?)?;
            let floor = 1.0 - cp.powi(2 * n as i32 + 2);
            worst = worst.max(floor - r.fidelity_lower_bound);
        }
        Ok((worst, cases.len()))
    })?);

    Ok(ValidationReport { grid, checks })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_grid_passes() {
        let report = run_validation(Grid::Small, None).unwrap();
        for c in &report.checks {
            assert!(
                c.passed,
                "{} failed: {:e} > {:e}",
                c.name, c.max_error, c.tolerance
            );
            assert!(c.cases > 0);
        }
        assert!(report.passed());
    }

    #[test]
    fn looser_tolerance_still_passes() {
        assert!(run_validation(Grid::Small, Some(1e-3)).unwrap().passed());
    }
}

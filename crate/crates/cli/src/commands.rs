use clap::Args;
use nla_core::coherent::{evaluate_coherent, min_cutoff_for_fidelity};
use nla_core::epr::{criterion, evaluate_at_target};
use nla_core::optimizer::{check_eta_grid, sweep_point, ConstraintSet, GAIN_CAP, GAIN_TOL};
use nla_core::validation::{run_validation, Grid};
use nla_core::{AmplifierSpec, NlaError};
use rayon::prelude::*;
use serde_json::json;

use crate::grid::{cutoffs_arg, reals_arg, spaced, Cutoffs, Reals};
use crate::output::{emit, Cell, Manifest, Table};
use crate::{Common, GainRange};

pub struct Failure {
    pub code: u8,
    pub error: anyhow::Error,
}

type Outcome = Result<u8, Failure>;

fn usage(e: impl Into<anyhow::Error>) -> Failure {
    Failure {
        code: 2,
        error: e.into(),
    }
}

impl From<NlaError> for Failure {
    fn from(e: NlaError) -> Self {
        let code = match e {
            NlaError::Domain(_) | NlaError::Dimension { .. } => 2,
            _ => 3,
        };
        Failure {
            code,
            error: e.into(),
        }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure { code: 3, error: e }
    }
}

fn finish(table: &Table, manifest: &Manifest, common: &Common) -> Outcome {
    let text = table.render(manifest, common.format)?;
    emit(&text, common.out.as_deref())?;
    Ok(0)
}

fn gains(range: &GainRange) -> Result<Vec<f64>, Failure> {
    spaced(range.g_min, range.g_max, range.g_steps, range.log).map_err(usage)
}

fn range_json(range: &GainRange) -> serde_json::Value {
    json!({ "g_min": range.g_min, "g_max": range.g_max, "g_steps": range.g_steps, "log": range.log })
}

#[derive(Args, Debug)]
pub struct CoherentArgs {
    /// Coherent amplitude |alpha|.
    #[arg(long)]
    pub alpha: f64,
    #[command(flatten)]
    pub range: GainRange,
    /// Fixed cutoffs, e.g. `1..4` or `1,3`. Defaults to `1`.
    #[arg(long, value_parser = cutoffs_arg, conflicts_with = "fmin")]
    pub n: Option<Cutoffs>,
    /// Pick the smallest cutoff reaching this fidelity at each gain.
    #[arg(long)]
    pub fmin: Option<f64>,
}

pub fn coherent(args: &CoherentArgs, common: &Common) -> Outcome {
    let gs = gains(&args.range)?;
    let mut table = Table::new(vec!["g", "N", "P", "F"]);
    let tasks: Vec<(f64, Option<u32>)> = match (&args.n, args.fmin) {
        (_, Some(_)) => gs.iter().map(|&g| (g, None)).collect(),
        (ns, None) => {
            let ns = ns.as_ref().map_or(vec![1], |c| c.0.clone());
            ns.iter()
                .flat_map(|&n| gs.iter().map(move |&g| (g, Some(n))))
                .collect()
        }
    };
    let rows = tasks
        .par_iter()
        .map(|&(g, n)| {
            let n = match n {
                Some(n) => n,
                None => min_cutoff_for_fidelity(args.alpha, g, args.fmin.unwrap_or(0.0))?,
            };
            evaluate_coherent(args.alpha, &AmplifierSpec::new(g, n)?)
        })
        .collect::<Result<Vec<_>, NlaError>>()?;
    for r in rows {
        table.push(vec![
            r.g.into(),
            r.n_used.into(),
            r.p_success.into(),
            r.fidelity.into(),
        ]);
    }
    let manifest = Manifest::new(
        "coherent",
        json!({ "alpha": args.alpha, "gain": range_json(&args.range), "n": args.n.as_ref().map(|c| &c.0), "fmin": args.fmin }),
        json!({}),
        common.timestamp,
    );
    finish(&table, &manifest, common)
}

#[derive(Args, Debug)]
pub struct EprArgs {
    /// Target output squeezing chi'.
    #[arg(long)]
    pub chi_prime: f64,
    /// Channel transmission.
    #[arg(long)]
    pub eta: f64,
    #[command(flatten)]
    pub range: GainRange,
    /// Single gain, overriding the range.
    #[arg(long)]
    pub g: Option<f64>,
    /// Cutoffs, e.g. `1..5` or `1,2`.
    #[arg(long, value_parser = cutoffs_arg, default_value = "1")]
    pub n: Cutoffs,
    /// Add the unamplified, input and infinite-squeezing criteria.
    #[arg(long)]
    pub with_baselines: bool,
}

pub fn epr(args: &EprArgs, common: &Common) -> Outcome {
    let gs = match args.g {
        Some(g) => vec![g],
        None => gains(&args.range)?,
    };
    let ns = &args.n.0;
    let mut columns = vec!["g", "N", "chi_in", "P", "F_lower", "epsilon"];
    if args.with_baselines {
        columns.extend(["eps_unamplified", "eps_input", "eps_infinite"]);
    }
    let mut table = Table::new(columns);
    let tasks: Vec<(u32, f64)> = ns
        .iter()
        .flat_map(|&n| gs.iter().map(move |&g| (n, g)))
        .collect();
    let results = tasks
        .par_iter()
        .map(|&(n, g)| evaluate_at_target(args.chi_prime, args.eta, &AmplifierSpec::new(g, n)?))
        .collect::<Result<Vec<_>, NlaError>>()?;
    for (&(n, g), r) in tasks.iter().zip(results) {
        let mut row: Vec<Cell> = vec![
            g.into(),
            n.into(),
            r.chi_in.into(),
            r.p_success.into(),
            r.fidelity_lower_bound.into(),
            r.epsilon_epr.into(),
        ];
        if args.with_baselines {
            row.extend([
                criterion(args.chi_prime, args.eta).into(),
                criterion(r.chi_in, args.eta).into(),
                ((1.0 - args.eta) * (1.0 - args.eta)).into(),
            ]);
        }
        table.push(row);
    }
    let gain = match args.g {
        Some(g) => json!({ "g": g }),
        None => range_json(&args.range),
    };
    let manifest = Manifest::new(
        "epr",
        json!({
            "chi_prime": args.chi_prime,
            "eta": args.eta,
            "gain": gain,
            "n": ns,
            "with_baselines": args.with_baselines,
        }),
        json!({ "series_truncation": 1e-15 }),
        common.timestamp,
    );
    finish(&table, &manifest, common)
}

#[derive(Args, Debug)]
pub struct OptimizeArgs {
    #[arg(long)]
    pub chi_prime: f64,
    #[arg(long, default_value_t = 0.99)]
    pub fmin: f64,
    /// Probability floors, comma separated.
    #[arg(long, value_parser = reals_arg, default_value = "0.1,0.01,0.001")]
    pub pmin: Reals,
    /// Transmissions: a comma list or `start:stop:steps`.
    #[arg(long, value_parser = reals_arg, default_value = "0.01:1:100")]
    pub eta_grid: Reals,
}

pub fn optimize(args: &OptimizeArgs, common: &Common) -> Outcome {
    let pmins = &args.pmin.0;
    let etas = &args.eta_grid.0;
    check_eta_grid(etas)?;
    let templates = pmins
        .iter()
        .map(|&p| ConstraintSet::new(args.fmin, p, args.chi_prime, 1.0))
        .collect::<Result<Vec<_>, _>>()?;
    let tasks: Vec<(usize, f64)> = (0..templates.len())
        .flat_map(|i| etas.iter().map(move |&e| (i, e)))
        .collect();
    let points: Vec<_> = tasks
        .par_iter()
        .map(|&(i, eta)| sweep_point(&templates[i], eta))
        .collect();

    let mut table = Table::new(vec![
        "p_min",
        "eta",
        "N",
        "g",
        "chi_in",
        "epsilon",
        "F",
        "P",
        "binding",
        "eps_unamplified",
        "eps_infinite",
        "error",
    ]);
    for (&(i, _), pt) in tasks.iter().zip(points) {
        let r = pt.result;
        table.push(vec![
            pmins[i].into(),
            pt.eta.into(),
            r.map(|r| r.n_star).into(),
            r.map(|r| r.g_star).into(),
            r.map(|r| r.chi_in).into(),
            r.map(|r| r.epsilon).into(),
            r.map(|r| r.fidelity).into(),
            r.map(|r| r.probability).into(),
            r.map(|r| r.binding.as_str()).into(),
            pt.baseline_unamplified.into(),
            pt.baseline_infinite_squeezing.into(),
            pt.error.as_deref().into(),
        ]);
    }
    let manifest = Manifest::new(
        "optimize",
        json!({ "chi_prime": args.chi_prime, "fmin": args.fmin, "pmin": pmins, "eta_grid": etas }),
        json!({ "gain_cap": GAIN_CAP, "gain_tolerance": GAIN_TOL }),
        common.timestamp,
    );
    finish(&table, &manifest, common)
}

#[derive(Args, Debug)]
pub struct ValidateArgs {
    #[arg(long, value_enum, default_value = "small")]
    pub grid: GridArg,
    /// Replace every check's tolerance.
    #[arg(long)]
    pub tol: Option<f64>,
}

#[derive(Debug, Clone, Copy, clap::ValueEnum)]
pub enum GridArg {
    Small,
    Full,
}

pub fn validate(args: &ValidateArgs, common: &Common) -> Outcome {
    if let Some(t) = args.tol {
        if t.is_nan() || t <= 0.0 {
            return Err(usage(anyhow::anyhow!("--tol must be positive, got {t}")));
        }
    }
    let grid = match args.grid {
        GridArg::Small => Grid::Small,
        GridArg::Full => Grid::Full,
    };
    let report = run_validation(grid, args.tol)?;
    let mut table = Table::new(vec!["check", "max_error", "tolerance", "passed", "cases"]);
    for c in &report.checks {
        eprintln!(
            "{:<4} {:<24} max error {:.3e} (tol {:.0e}, {} cases, {:.1} ms)",
            if c.passed { "ok" } else { "FAIL" },
            c.name,
            c.max_error,
            c.tolerance,
            c.cases,
            c.elapsed_ms
        );
        table.push(vec![
            c.name.as_str().into(),
            c.max_error.into(),
            c.tolerance.into(),
            c.passed.into(),
            c.cases.into(),
        ]);
    }
    let manifest = Manifest::new(
        "validate",
        json!({ "grid": report.grid }),
        json!({ "override": args.tol }),
        common.timestamp,
    );
    finish(&table, &manifest, common)?;
    Ok(if report.passed() { 0 } else { 1 })
}

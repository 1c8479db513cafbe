//! Constrained minimisation of the EPR criterion over cutoff and gain.
//!
//! The output squeezing `chi'` is held fixed and the input squeezing follows
//! the gain. At fixed `(chi', eta, N)` both the fidelity bound and the success
//! probability fall monotonically with `g`, while the EPR criterion of the
//! amplified state also falls. The best gain for each `N` is therefore the
//! largest feasible one, located by bisection, and the optimum over `N` is a
//! finite scan.

use serde::{Deserialize, Serialize};

use crate::epr::{criterion, evaluate_at_target, max_cutoff, CutoffFlag, EprResult};
use crate::error::{domain, NlaError, Result};
use crate::fock::AmplifierSpec;

/// Upper bracket for the gain search.
pub const GAIN_CAP: f64 = 1e4;
/// Bisection stops once the bracket is narrower than this.
pub const GAIN_TOL: f64 = 1e-9;
/// Extra cutoffs searched beyond [`max_cutoff`].
pub const CUTOFF_GUARD: u32 = 2;
/// A result sits on a constraint when within this distance of it.
pub const BOUNDARY_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstraintSet {
    pub f_min: f64,
    pub p_min: f64,
    pub chi_prime: f64,
    pub eta: f64,
}

impl ConstraintSet {
    pub fn new(f_min: f64, p_min: f64, chi_prime: f64, eta: f64) -> Result<Self> {
        if !(f_min > 0.0 && f_min < 1.0) {
            return domain(format!("f_min must lie in (0, 1), got {f_min}"));
        }
        if !(p_min > 0.0 && p_min <= 1.0) {
            return domain(format!("p_min must lie in (0, 1], got {p_min}"));
        }
        if !(chi_prime > 0.0 && chi_prime < 1.0) {
            return domain(format!("chi' must lie in (0, 1), got {chi_prime}"));
        }
        if !(0.0..=1.0).contains(&eta) {
            return domain(format!("eta must lie in [0, 1], got {eta}"));
        }
        Ok(ConstraintSet {
            f_min,
            p_min,
            chi_prime,
            eta,
        })
    }

    pub fn with_eta(&self, eta: f64) -> Result<Self> {
        Self::new(self.f_min, self.p_min, self.chi_prime, eta)
    }

    fn admits(&self, r: &EprResult) -> bool {
        r.fidelity_lower_bound >= self.f_min && r.p_success >= self.p_min
    }

    /// Criterion without amplification at the same `chi'`.
    pub fn unamplified_criterion(&self) -> f64 {
        criterion(self.chi_prime, self.eta)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Binding {
    Fidelity,
    Probability,
    GainCap,
    /// Neither constraint is active and the gain is below the cap.
    None,
}

impl Binding {
    pub fn as_str(self) -> &'static str {
        match self {
            Binding::Fidelity => "FIDELITY",
            Binding::Probability => "PROBABILITY",
            Binding::GainCap => "GAIN_CAP",
            Binding::None => "NONE",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeasibleGain {
    pub g: f64,
    pub binding: Binding,
    pub at_gain: EprResult,
}

fn evaluate(c: &ConstraintSet, n: u32, g: f64) -> Result<EprResult> {
    evaluate_at_target(c.chi_prime, c.eta, &AmplifierSpec::new(g, n)?)
}

/// Largest gain in `[1, GAIN_CAP]` meeting both constraints at cutoff `n`.
pub fn max_feasible_gain(n: u32, c: &ConstraintSet) -> Result<FeasibleGain> {
    if n < 1 {
        return domain("cutoff must be >= 1");
    }
    let at_one = evaluate(c, n, 1.0)?;
    if !c.admits(&at_one) {
        return Err(NlaError::Infeasible(format!(
            "g = 1 gives F = {}, P = {} against f_min = {}, p_min = {}",
            at_one.fidelity_lower_bound, at_one.p_success, c.f_min, c.p_min
        )));
    }
    let at_cap = evaluate(c, n, GAIN_CAP)?;
    if c.admits(&at_cap) {
        return Ok(FeasibleGain {
            g: GAIN_CAP,
            binding: Binding::GainCap,
            at_gain: at_cap,
        });
    }

    let (mut lo, mut hi) = ((1.0, at_one), (GAIN_CAP, at_cap));
    while hi.0 - lo.0 > GAIN_TOL {
        // Geometric steps while the bracket spans decades.
        let mid = if hi.0 > 2.0 * lo.0 {
            (lo.0 * hi.0).sqrt()
        } else {
            0.5 * (lo.0 + hi.0)
        };
        let r = evaluate(c, n, mid)?;
        if c.admits(&r) {
            lo = (mid, r);
        } else {
            hi = (mid, r);
        }
    }

    let (g, r) = lo;
    let f_fails = hi.1.fidelity_lower_bound < c.f_min;
    let p_fails = hi.1.p_success < c.p_min;
    let binding = match (f_fails, p_fails) {
        (true, false) => Binding::Fidelity,
        (false, true) => Binding::Probability,
        (true, true) => {
            if r.fidelity_lower_bound - c.f_min <= r.p_success - c.p_min {
                Binding::Fidelity
            } else {
                Binding::Probability
            }
        }
        (false, false) => Binding::None,
    };
    Ok(FeasibleGain {
        g,
        binding,
        at_gain: r,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimizationResult {
    pub n_star: u32,
    pub g_star: f64,
    pub chi_in: f64,
    pub epsilon: f64,
    pub fidelity: f64,
    pub probability: f64,
    pub binding: Binding,
}

impl OptimizationResult {
    /// Whether the optimum sits on a constraint (or the gain cap).
    pub fn on_boundary(&self, c: &ConstraintSet) -> bool {
        self.binding == Binding::GainCap
            || (self.fidelity - c.f_min).abs() <= BOUNDARY_TOL
            || (self.probability - c.p_min).abs() <= BOUNDARY_TOL
    }
}

/// Cutoffs examined by [`optimize_epr`].
pub fn cutoff_range(c: &ConstraintSet) -> Result<std::ops::RangeInclusive<u32>> {
    let bound = max_cutoff(c.f_min, c.chi_prime)?;
    let top = match bound.flag {
        CutoffFlag::BelowZero => 0,
        CutoffFlag::Within | CutoffFlag::Capped => bound.n,
    };
    Ok(1..=top + CUTOFF_GUARD)
}

/// Minimal EPR criterion over `(N, g)`; ties go to the smaller `N`.
pub fn optimize_epr(c: &ConstraintSet) -> Result<OptimizationResult> {
    let mut best: Option<OptimizationResult> = None;
    for n in cutoff_range(c)? {
        let fg = max_feasible_gain(n, c)?;
        let candidate = OptimizationResult {
            n_star: n,
            g_star: fg.g,
            chi_in: fg.at_gain.chi_in,
            epsilon: fg.at_gain.epsilon_epr,
            fidelity: fg.at_gain.fidelity_lower_bound,
            probability: fg.at_gain.p_success,
            binding: fg.binding,
        };
        match best {
            Some(b) if candidate.epsilon >= b.epsilon - 1e-12 => {}
            _ => best = Some(candidate),
        }
    }
    best.ok_or_else(|| NlaError::Infeasible("empty cutoff range".into()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EtaSweepPoint {
    pub eta: f64,
    pub result: Option<OptimizationResult>,
    pub error: Option<String>,
    /// Criterion at the same `chi'` without amplification.
    pub baseline_unamplified: f64,
    /// `(1 - eta)^2`, an infinitely squeezed source through the same loss.
    pub baseline_infinite_squeezing: f64,
}

/// Sweep grids must be ascending within `(0, 1]`.
pub fn check_eta_grid(eta_grid: &[f64]) -> Result<()> {
    if eta_grid.windows(2).any(|w| w[1] < w[0]) {
        return domain("eta grid must be sorted ascending");
    }
    if eta_grid.iter().any(|&e| !(e > 0.0 && e <= 1.0)) {
        return domain("eta grid values must lie in (0, 1]");
    }
    Ok(())
}

/// [`optimize_epr`] at each `eta`; failures are recorded per point.
pub fn sweep_eta(
    f_min: f64,
    p_min: f64,
    chi_prime: f64,
    eta_grid: &[f64],
) -> Result<Vec<EtaSweepPoint>> {
    check_eta_grid(eta_grid)?;
    let template = ConstraintSet::new(f_min, p_min, chi_prime, 1.0)?;
    Ok(eta_grid
        .iter()
        .map(|&eta| sweep_point(&template, eta))
        .collect())
}

/// One point of [`sweep_eta`].
pub fn sweep_point(template: &ConstraintSet, eta: f64) -> EtaSweepPoint {
    let outcome = template.with_eta(eta).and_then(|c| optimize_epr(&c));
    let (result, error) = match outcome {
        Ok(r) => (Some(r), None),
        Err(e) => (None, Some(e.to_string())),
    };
    EtaSweepPoint {
        eta,
        result,
        error,
        baseline_unamplified: criterion(template.chi_prime, eta),
        baseline_infinite_squeezing: (1.0 - eta) * (1.0 - eta),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constraint_validation() {
        assert!(ConstraintSet::new(1.0, 0.1, 0.5, 0.3).is_err());
        assert!(ConstraintSet::new(0.99, 0.0, 0.5, 0.3).is_err());
        assert!(ConstraintSet::new(0.99, 0.1, 1.0, 0.3).is_err());
        assert!(ConstraintSet::new(0.99, 0.1, 0.5, 1.2).is_err());
        assert!(ConstraintSet::new(0.99, 1.0, 0.5, 0.0).is_ok());
    }

    #[test]
    fn certain_success_pins_gain_to_one() {
        let c = ConstraintSet::new(0.99, 1.0, 0.5, 0.3).unwrap();
        let fg = max_feasible_gain(2, &c).unwrap();
        assert!(fg.g - 1.0 <= 2.0 * GAIN_TOL);
        assert_eq!(fg.binding, Binding::Probability);
    }

    #[test]
    fn gain_cap_when_fidelity_floor_clears_target() {
        // Floor 1 - 0.5^4 = 0.9375 > 0.9 and p_min below any reachable P.
        let c = ConstraintSet::new(0.9, 1e-12, 0.5, 0.3).unwrap();
        let fg = max_feasible_gain(1, &c).unwrap();
        assert_eq!(fg.g, GAIN_CAP);
        assert_eq!(fg.binding, Binding::GainCap);
    }

    #[test]
    fn bisection_lands_on_a_constraint() {
        let c = ConstraintSet::new(0.99, 0.001, 0.5, 0.25).unwrap();
        let fg = max_feasible_gain(2, &c).unwrap();
        let r = fg.at_gain;
        assert!(r.fidelity_lower_bound >= c.f_min && r.p_success >= c.p_min);
        let slack = match fg.binding {
            Binding::Fidelity => r.fidelity_lower_bound - c.f_min,
            Binding::Probability => r.p_success - c.p_min,
            other => panic!("unexpected binding {other:?}"),
        };
        assert!(slack <= BOUNDARY_TOL, "slack {slack}");
        let beyond = evaluate(&c, 2, fg.g + 1e-6).unwrap();
        assert!(!c.admits(&beyond));
    }

    #[test]
    fn cutoff_range_includes_guard() {
        let c = ConstraintSet::new(0.99, 0.01, 0.5, 0.5).unwrap();
        assert_eq!(cutoff_range(&c).unwrap(), 1..=4);
        let c = ConstraintSet::new(0.99, 0.01, 0.8, 0.5).unwrap();
        assert_eq!(cutoff_range(&c).unwrap(), 1..=11);
    }

    #[test]
    fn lossless_channel_criterion_is_gain_independent() {
        // eta = 1 keeps eta' = 1, so every feasible gain gives the same
        // criterion and the tie goes to N = 1.
        let c = ConstraintSet::new(0.99, 0.001, 0.5, 1.0).unwrap();
        let r = optimize_epr(&c).unwrap();
        assert_eq!(r.n_star, 1);
        assert!((r.epsilon - criterion(0.5, 1.0)).abs() < 1e-12);
    }

    #[test]
    fn sweep_validation_and_baselines() {
        assert!(sweep_eta(0.99, 0.01, 0.5, &[0.5, 0.4]).is_err());
        assert!(sweep_eta(0.99, 0.01, 0.5, &[0.0, 0.4]).is_err());
        let pts = sweep_eta(0.99, 0.01, 0.5, &[0.5, 1.0]).unwrap();
        assert_eq!(pts.len(), 2);
        assert_eq!(pts[0].baseline_infinite_squeezing, 0.25);
        assert_eq!(pts[1].baseline_unamplified, criterion(0.5, 1.0));
        assert!(pts.iter().all(|p| p.result.is_some() && p.error.is_none()));
    }
}

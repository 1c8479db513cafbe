//! Brute-force evaluation of success probability and fidelity by explicit
//! truncated Fock-space sums.
//!
//! Nothing here touches [`crate::special_functions`]: every quantity is an
//! inner product of explicitly constructed state vectors, accumulated with
//! compensated summation in order of increasing photon number. This is the
//! ground truth the closed forms in [`crate::coherent`] and [`crate::epr`]
//! are checked against.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::epr::{transform_params, LossyEprParams};
use crate::error::{NlaError, Result};
use crate::fock::{self, make_coherent, make_ms, AmplifierSpec, Mode, ThreeModeState};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleConfig {
    pub n_max: usize,
    /// Largest neglected mass accepted before the evaluation is refused.
    pub max_tail: f64,
}

impl OracleConfig {
    pub fn new(n_max: usize) -> Self {
        OracleConfig {
            n_max,
            max_tail: 1e-13,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleValue {
    pub p: f64,
    pub f: f64,
    /// Upper bound on the mass dropped by truncation, for both sums.
    pub tail_bound: f64,
}

fn check_tail(tail: f64, cfg: &OracleConfig) -> Result<()> {
    if tail > cfg.max_tail {
        return Err(NlaError::TailBound {
            tail,
            bound: cfg.max_tail,
            n_max: cfg.n_max,
        });
    }
    Ok(())
}

/// Coherent input `|alpha>`: `P = ||M_S|alpha>||^2`,
/// `F = |<g alpha|M_S|alpha>|^2 / P`.
pub fn oracle_coherent(
    alpha_mag: f64,
    spec: &AmplifierSpec,
    cfg: &OracleConfig,
) -> Result<OracleValue> {
    if !(alpha_mag >= 0.0) {
        return Err(NlaError::Domain(format!(
            "|alpha| must be >= 0, got {alpha_mag}"
        )));
    }
    let g = spec.g();
    let x = alpha_mag * alpha_mag;
    let (psi, tail_p) = make_coherent(Complex64::new(alpha_mag, 0.0), cfg.n_max)?;
    let (target, _) = make_coherent(Complex64::new(g * alpha_mag, 0.0), cfg.n_max)?;

    // Overlap summands are e^{-(1+g^2)x/2} (g x)^n / n!.
    let tail_overlap = if x == 0.0 {
        0.0
    } else {
        (-(1.0 + g * g) * x / 2.0 + g * x).exp() * fock::poisson_upper_tail(g * x, cfg.n_max)
    };
    let tail_bound = tail_p.max(tail_overlap);
    check_tail(tail_bound, cfg)?;

    let out = make_ms(spec, cfg.n_max)?.apply(&psi)?;
    let p = out.norm_sqr();
    let overlap = target.inner(&out)?;
    Ok(OracleValue {
        p,
        f: overlap.norm_sqr() / p,
        tail_bound,
    })
}

/// One-sided lossy EPR input `(chi, eta)` amplified on its transmitted mode:
/// `P = ||M_S|EPR_l>||^2` and the purification fidelity
/// `|<EPR'_l|M_S|EPR_l>|^2 / P` against the `(chi', eta')` state.
pub fn oracle_epr(
    chi: f64,
    eta: f64,
    spec: &AmplifierSpec,
    cfg: &OracleConfig,
) -> Result<OracleValue> {
    let params = LossyEprParams::new(chi, eta)?;
    let out_params = transform_params(&params, spec.g())?;
    let chi_p = out_params.chi_prime;
    if chi_p >= 1.0 {
        return Err(NlaError::Divergent { chi_prime: chi_p });
    }
    let n_max = cfg.n_max;
    let tail_p = chi.powi(2 * (n_max as i32 + 1));
    let tail_overlap = ((1.0 - chi * chi) * (1.0 - chi_p * chi_p)).sqrt()
        * chi_p.powi(2 * (n_max as i32 + 1))
        / (1.0 - chi_p * chi_p);
    let tail_bound = tail_p.max(tail_overlap);
    check_tail(tail_bound, cfg)?;

    let mut input = ThreeModeState::lossy_epr_unnormalized(chi, eta, n_max)?;
    input.scale((1.0 - chi * chi).sqrt());
    let mut target = ThreeModeState::lossy_epr_unnormalized(chi_p, out_params.eta_prime, n_max)?;
    target.scale((1.0 - chi_p * chi_p).sqrt());

    let out = input.apply_diag(&make_ms(spec, n_max)?, Mode::Second)?;
    let p = out.norm_sqr();
    let overlap = target.inner(&out)?;
    Ok(OracleValue {
        p,
        f: overlap * overlap / p,
        tail_bound,
    })
}

/// Overlap fidelity between the truncated lossy EPR state `(chi, eta)` with
/// the ideal gain `g^{n}` applied to its transmitted mode and the truncated
/// `(chi', eta')` state. Both sides are normalized after truncation, so the
/// comparison also works when `chi' >= 1`.
pub fn oracle_transform_fidelity(chi: f64, eta: f64, g: f64, n_max: usize) -> Result<f64> {
    let params = LossyEprParams::new(chi, eta)?;
    let out = transform_params(&params, g)?;
    let amplified = ThreeModeState::lossy_epr_unnormalized(chi, eta, n_max)?
        .apply_diag(&fock::DiagonalOperator::ideal_gain(g, n_max), Mode::Second)?;
    let target = ThreeModeState::lossy_epr_unnormalized(out.chi_prime, out.eta_prime, n_max)?;
    let overlap = amplified.inner(&target)?;
    Ok(overlap * overlap / (amplified.norm_sqr() * target.norm_sqr()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn spec(g: f64, n: u32) -> AmplifierSpec {
        AmplifierSpec::new(g, n).unwrap()
    }

    #[test]
    fn coherent_identity_gain() {
        let v = oracle_coherent(0.8, &spec(1.0, 2), &OracleConfig::new(60)).unwrap();
        assert_abs_diff_eq!(v.p, 1.0, epsilon = 1e-13);
        assert_abs_diff_eq!(v.f, 1.0, epsilon = 1e-13);
    }

    #[test]
    fn coherent_vacuum_input() {
        for n in 0..4 {
            let v = oracle_coherent(0.0, &spec(2.0, n), &OracleConfig::new(10)).unwrap();
            assert_abs_diff_eq!(v.p, 2f64.powi(-2 * n as i32), epsilon = 1e-15);
            assert_abs_diff_eq!(v.f, 1.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn coherent_tail_violation() {
        let err = oracle_coherent(3.0, &spec(2.0, 1), &OracleConfig::new(10)).unwrap_err();
        assert!(matches!(err, NlaError::TailBound { .. }));
    }

    #[test]
    fn epr_identity_gain() {
        let v = oracle_epr(0.5, 0.3, &spec(1.0, 2), &OracleConfig::new(80)).unwrap();
        assert_abs_diff_eq!(v.p, 1.0, epsilon = 1e-13);
        assert_abs_diff_eq!(v.f, 1.0, epsilon = 1e-13);
    }

    #[test]
    fn epr_lossless_reduces_to_two_mode() {
        let (chi, g, n) = (0.3, 2.0, 2u32);
        let v = oracle_epr(chi, 1.0, &spec(g, n), &OracleConfig::new(80)).unwrap();
        let s = spec(g, n);
        let direct: f64 = (0..=80)
            .map(|k| s.success_amplitude(k).powi(2) * chi.powi(2 * k as i32))
            .sum::<f64>()
            * (1.0 - chi * chi);
        assert_abs_diff_eq!(v.p, direct, epsilon = 1e-14);
    }

    #[test]
    fn epr_divergence() {
        // eta = 1: chi' = g chi
        let err = oracle_epr(0.5, 1.0, &spec(2.5, 1), &OracleConfig::new(40)).unwrap_err();
        assert!(matches!(err, NlaError::Divergent { .. }));
    }

    #[test]
    fn transform_identity_holds_after_truncation() {
        for (chi, eta, g) in [(0.2, 0.25, 1.5), (0.5, 0.7, 2.5)] {
            let f = oracle_transform_fidelity(chi, eta, g, 60).unwrap();
            assert!(1.0 - f < 1e-12, "{chi} {eta} {g}: {f}");
        }
    }

    #[test]
    fn doubling_truncation_is_stable() {
        let s = spec(2.0, 2);
        let a = oracle_epr(0.25, 0.3, &s, &OracleConfig::new(60)).unwrap();
        let b = oracle_epr(0.25, 0.3, &s, &OracleConfig::new(120)).unwrap();
        assert!((a.p / b.p - 1.0).abs() < 1e-12);
        assert!((a.f / b.f - 1.0).abs() < 1e-12);
        let a = oracle_coherent(0.8, &s, &OracleConfig::new(40)).unwrap();
        let b = oracle_coherent(0.8, &s, &OracleConfig::new(80)).unwrap();
        assert!((a.p / b.p - 1.0).abs() < 1e-12);
        assert!((a.f / b.f - 1.0).abs() < 1e-12);
    }
}

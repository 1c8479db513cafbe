//! Coherent-state inputs: closed-form success probability and fidelity.
//!
//! With `x = |alpha|^2`, success probability and the amplitude overlap with
//! the ideal output `|g alpha>` split at the cutoff into two Poisson tails:
//!
//! ```text
//! P_c = P(N+1, x) + g^{-2N} e^{(g^2-1) x} Q(N+1, g^2 x)
//! <g alpha|M_S|alpha> = g^{-N} e^{(g^2-1) x/2} Q(N+1, g^2 x) + e^{-(g-1)^2 x/2} P(N+1, g x)
//! F_c = |<g alpha|M_S|alpha>|^2 / P_c
//! ```

use serde::{Deserialize, Serialize};

use crate::error::{domain, NlaError, Result};
use crate::fock::AmplifierSpec;
use crate::special_functions::{ln_reg_gamma_q, reg_gamma_p, reg_gamma_q};

/// Cutoff search gives up past this `N`.
pub const MAX_CUTOFF_SEARCH: u32 = 200;

/// Exponents above this are evaluated in the log domain.
const LOG_DOMAIN_EXPONENT: f64 = 300.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoherentResult {
    pub g: f64,
    pub n_used: u32,
    pub alpha_mag: f64,
    pub p_success: f64,
    pub fidelity: f64,
}

fn check_alpha(alpha_mag: f64) -> Result<()> {
    if !(alpha_mag >= 0.0) || !alpha_mag.is_finite() {
        return domain(format!("|alpha| must be finite and >= 0, got {alpha_mag}"));
    }
    Ok(())
}

/// `scale * e^{exponent} * Q(a, y)`, switching to logs for large exponents.
fn scaled_upper_tail(ln_scale: f64, exponent: f64, a: u32, y: f64) -> Result<f64> {
    if exponent > LOG_DOMAIN_EXPONENT {
        Ok((ln_scale + exponent + ln_reg_gamma_q(a, y)?).exp())
    } else {
        Ok(ln_scale.exp() * exponent.exp() * reg_gamma_q(a, y)?.value())
    }
}

pub fn prob_coherent(alpha_mag: f64, spec: &AmplifierSpec) -> Result<f64> {
    check_alpha(alpha_mag)?;
    let (g, n) = (spec.g(), spec.cutoff());
    let x = alpha_mag * alpha_mag;
    let above = reg_gamma_p(n + 1, x)?.value();
    let below = scaled_upper_tail(
        -2.0 * n as f64 * g.ln(),
        (g * g - 1.0) * x,
        n + 1,
        g * g * x,
    )?;
    Ok((above + below).min(1.0))
}

/// `<g alpha|M_S|alpha>` for real positive `alpha`.
fn overlap_coherent(alpha_mag: f64, spec: &AmplifierSpec) -> Result<f64> {
    let (g, n) = (spec.g(), spec.cutoff());
    let x = alpha_mag * alpha_mag;
    let below = scaled_upper_tail(
        -(n as f64) * g.ln(),
        (g * g - 1.0) * x / 2.0,
        n + 1,
        g * g * x,
    )?;
    let above = (-(g - 1.0).powi(2) * x / 2.0).exp() * reg_gamma_p(n + 1, g * x)?.value();
    Ok(below + above)
}

pub fn fidelity_coherent(alpha_mag: f64, spec: &AmplifierSpec) -> Result<f64> {
    check_alpha(alpha_mag)?;
    let p = prob_coherent(alpha_mag, spec)?;
    let overlap = overlap_coherent(alpha_mag, spec)?;
    Ok(overlap * overlap / p)
}

pub fn evaluate_coherent(alpha_mag: f64, spec: &AmplifierSpec) -> Result<CoherentResult> {
    Ok(CoherentResult {
        g: spec.g(),
        n_used: spec.cutoff(),
        alpha_mag,
        p_success: prob_coherent(alpha_mag, spec)?,
        fidelity: fidelity_coherent(alpha_mag, spec)?,
    })
}

/// Smallest `N >= 1` whose fidelity reaches `f_min`.
pub fn min_cutoff_for_fidelity(alpha_mag: f64, g: f64, f_min: f64) -> Result<u32> {
    if !(f_min > 0.0 && f_min < 1.0) {
        return domain(format!("f_min must lie in (0, 1), got {f_min}"));
    }
    for n in 1..=MAX_CUTOFF_SEARCH {
        if fidelity_coherent(alpha_mag, &AmplifierSpec::new(g, n)?)? >= f_min {
            return Ok(n);
        }
    }
    Err(NlaError::CutoffCap {
        cap: MAX_CUTOFF_SEARCH,
        f_min,
    })
}

/// Per gain, the minimal cutoff meeting `f_min` and the resulting `(P, F)`.
pub fn sweep_coherent(alpha_mag: f64, g_grid: &[f64], f_min: f64) -> Result<Vec<CoherentResult>> {
    check_alpha(alpha_mag)?;
    if g_grid.windows(2).any(|w| w[1] < w[0]) {
        return domain("gain grid must be sorted ascending");
    }
    g_grid
        .iter()
        .map(|&g| {
            let n = min_cutoff_for_fidelity(alpha_mag, g, f_min)?;
            evaluate_coherent(alpha_mag, &AmplifierSpec::new(g, n)?)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{oracle_coherent, OracleConfig};
    use approx::assert_abs_diff_eq;

    fn spec(g: f64, n: u32) -> AmplifierSpec {
        AmplifierSpec::new(g, n).unwrap()
    }

    #[test]
    fn vacuum_probability() {
        assert_abs_diff_eq!(
            prob_coherent(0.0, &spec(2.0, 1)).unwrap(),
            0.25,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            fidelity_coherent(0.0, &spec(2.0, 1)).unwrap(),
            1.0,
            epsilon = 1e-15
        );
    }

    #[test]
    fn identity_gain() {
        for alpha in [0.0, 0.3, 1.5, 4.0] {
            for n in [0, 1, 5] {
                let r = evaluate_coherent(alpha, &spec(1.0, n)).unwrap();
                assert_abs_diff_eq!(r.p_success, 1.0, epsilon = 1e-12);
                assert_abs_diff_eq!(r.fidelity, 1.0, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn matches_oracle_examples() {
        let cfg = OracleConfig::new(60);
        let o = oracle_coherent(0.8, &spec(2.0, 2), &cfg).unwrap();
        assert!((prob_coherent(0.8, &spec(2.0, 2)).unwrap() / o.p - 1.0).abs() < 1e-10);
        let o = oracle_coherent(0.8, &spec(2.0, 3), &cfg).unwrap();
        assert!((fidelity_coherent(0.8, &spec(2.0, 3)).unwrap() / o.f - 1.0).abs() < 1e-10);
    }

    #[test]
    fn small_alpha_fidelity_tends_to_one() {
        for g in [1.5, 3.0] {
            let f = fidelity_coherent(1e-3, &spec(g, 1)).unwrap();
            assert!(1.0 - f < 10.0 * 1e-6);
        }
    }

    #[test]
    fn large_gain_uses_log_domain() {
        // (g^2 - 1) x = 399 * 4 > 300; the product stays bounded by 1.
        let p = prob_coherent(2.0, &spec(20.0, 3)).unwrap();
        assert!(p.is_finite() && (0.0..=1.0).contains(&p));
        let f = fidelity_coherent(2.0, &spec(20.0, 3)).unwrap();
        assert!(f.is_finite() && (0.0..=1.0 + 1e-12).contains(&f));
    }

    #[test]
    fn min_cutoff_examples() {
        assert_eq!(min_cutoff_for_fidelity(0.1, 2.0, 0.99).unwrap(), 1);
        assert_eq!(min_cutoff_for_fidelity(0.1, 1.01, 0.99).unwrap(), 1);
        assert!(min_cutoff_for_fidelity(0.1, 2.0, 1.0).is_err());
    }

    #[test]
    fn min_cutoff_matches_oracle_scan() {
        let cfg = OracleConfig::new(80);
        let scan = (1..=40)
            .find(|&n| oracle_coherent(0.8, &spec(4.0, n), &cfg).unwrap().f >= 0.99)
            .unwrap();
        assert_eq!(min_cutoff_for_fidelity(0.8, 4.0, 0.99).unwrap(), scan);
    }

    #[test]
    fn sweep_rejects_unsorted_grid() {
        assert!(sweep_coherent(0.3, &[1.0, 2.0, 1.5], 0.99).is_err());
    }
}

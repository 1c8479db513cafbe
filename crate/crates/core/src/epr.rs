//! One-sided lossy EPR inputs.
//!
//! Ideal amplification of the transmitted mode maps a lossy EPR state
//! `(chi, eta)` onto another lossy EPR state `(chi', eta')` with
//! `chi' = f chi`, `eta' = g^2 eta / f^2` and `f = sqrt(1 - eta + eta g^2)`.
//! The amplifier is analysed at a fixed target `chi'`, so the input squeezing
//! is chosen per gain via [`chi_for_target`].

use serde::{Deserialize, Serialize};

use crate::error::{domain, NlaError, Result};
use crate::fock::{AmplifierSpec, ThreeModeState};
use crate::special_functions::reg_beta_i;
use crate::summation::CompensatedSum;

/// Upper bound returned by [`max_cutoff`] when the cutoff bound diverges.
pub const CUTOFF_CAP: u32 = 200;

/// Squeezing `chi in [0, 1)` and transmission `eta in [0, 1]` of a lossy EPR
/// state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossyEprParams {
    chi: f64,
    eta: f64,
}

impl LossyEprParams {
    pub fn new(chi: f64, eta: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&chi) {
            return domain(format!("squeezing must lie in [0, 1), got {chi}"));
        }
        if !(0.0..=1.0).contains(&eta) {
            return domain(format!("transmission must lie in [0, 1], got {eta}"));
        }
        Ok(LossyEprParams { chi, eta })
    }

    pub fn chi(&self) -> f64 {
        self.chi
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }
}

/// Parameters of the ideally amplified state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransformedParams {
    pub chi_prime: f64,
    pub eta_prime: f64,
    pub f: f64,
}

/// Normalized lossy EPR state `sqrt(1 - chi^2) sum chi^n sqrt(C(n,t) eta^t (1-eta)^{n-t}) |n, t, n-t>`.
pub fn make_lossy_epr(params: &LossyEprParams, n_max: usize) -> Result<ThreeModeState> {
    let mut state = ThreeModeState::lossy_epr_unnormalized(params.chi, params.eta, n_max)?;
    state.scale((1.0 - params.chi * params.chi).sqrt());
    Ok(state)
}

fn aux_factor(eta: f64, g: f64) -> f64 {
    (1.0 - eta + eta * g * g).sqrt()
}

fn check_gain(g: f64) -> Result<()> {
    if !(g >= 1.0) || !g.is_finite() {
        return domain(format!("gain must be finite and >= 1, got {g}"));
    }
    Ok(())
}

pub fn transform_params(params: &LossyEprParams, g: f64) -> Result<TransformedParams> {
    check_gain(g)?;
    let f = aux_factor(params.eta, g);
    Ok(TransformedParams {
        chi_prime: f * params.chi,
        eta_prime: (g * g * params.eta / (f * f)).min(1.0),
        f,
    })
}

/// Input squeezing that produces the target `chi'` at this `(eta, g)`.
pub fn chi_for_target(chi_prime: f64, eta: f64, g: f64) -> Result<f64> {
    check_gain(g)?;
    if !(0.0..=1.0).contains(&eta) {
        return domain(format!("transmission must lie in [0, 1], got {eta}"));
    }
    if !(chi_prime >= 0.0) {
        return domain(format!("target squeezing must be >= 0, got {chi_prime}"));
    }
    let chi = chi_prime / aux_factor(eta, g);
    if chi >= 1.0 {
        return Err(NlaError::UnreachableTarget {
            chi_prime,
            eta,
            g,
            chi,
        });
    }
    Ok(chi)
}

/// EPR criterion `(1 - 2 chi^2 eta / (1 + chi^2))^2`, the product of the two
/// optimal conditional quadrature variances.
pub fn epr_criterion(params: &LossyEprParams) -> f64 {
    criterion(params.chi, params.eta)
}

/// The criterion as a plain formula; `chi -> 1` gives the infinitely
/// squeezed limit `(1 - eta)^2`.
pub fn criterion(chi: f64, eta: f64) -> f64 {
    let chi2 = chi * chi;
    let v = 1.0 - 2.0 * chi2 * eta / (1.0 + chi2);
    v * v
}

/// Number of series terms such that `chi'^{2n} < 1e-15 (1 - chi'^2)`.
pub fn series_terms(chi_prime: f64) -> usize {
    if chi_prime <= 0.0 {
        return 1;
    }
    let target = 1e-15 * (1.0 - chi_prime * chi_prime);
    (target.ln() / (2.0 * chi_prime.ln())).ceil().max(1.0) as usize
}

/// Validated state of a closed-form evaluation.
struct EprSetup {
    chi: f64,
    eta: f64,
    g: f64,
    cutoff: u32,
    out: TransformedParams,
}

fn setup(chi: f64, eta: f64, spec: &AmplifierSpec) -> Result<EprSetup> {
    let params = LossyEprParams::new(chi, eta)?;
    let out = transform_params(&params, spec.g())?;
    if out.chi_prime >= 1.0 {
        return Err(NlaError::Divergent {
            chi_prime: out.chi_prime,
        });
    }
    Ok(EprSetup {
        chi,
        eta,
        g: spec.g(),
        cutoff: spec.cutoff(),
        out,
    })
}

/// Success probability `||M_S |EPR_l>||^2` in closed form.
pub fn prob_epr(chi: f64, eta: f64, spec: &AmplifierSpec) -> Result<f64> {
    let s = setup(chi, eta, spec)?;
    prob_epr_series(&s, series_terms(s.out.chi_prime))
}

/// [`prob_epr`] with an explicit number of series terms.
pub fn prob_epr_terms(chi: f64, eta: f64, spec: &AmplifierSpec, n_terms: usize) -> Result<f64> {
    let s = setup(chi, eta, spec)?;
    prob_epr_series(&s, n_terms)
}

fn prob_epr_series(s: &EprSetup, n_terms: usize) -> Result<f64> {
    let n_cut = s.cutoff as usize;
    let chi2 = s.chi * s.chi;
    let chip2 = s.out.chi_prime * s.out.chi_prime;
    let g_2n = s.g.powi(-2 * s.cutoff as i32);

    let mut acc = CompensatedSum::new();
    acc.add(g_2n / (1.0 - chip2));
    for n in n_cut + 1..=n_terms.max(n_cut + 1) {
        let b = (n - n_cut) as u32;
        let lossy = chi2.powi(n as i32) * reg_beta_i(s.eta, s.cutoff + 1, b)?.value();
        let ideal =
            g_2n * chip2.powi(n as i32) * reg_beta_i(s.out.eta_prime, s.cutoff + 1, b)?.value();
        acc.add(lossy - ideal);
    }
    Ok(((1.0 - chi2) * acc.value()).clamp(0.0, 1.0))
}

/// `sqrt(F P) / sqrt((1 - chi^2)(1 - chi'^2))` as a series.
fn overlap_series(s: &EprSetup, n_terms: usize) -> Result<f64> {
    let n_cut = s.cutoff as usize;
    let (g, eta) = (s.g, s.eta);
    let f = s.out.f;
    let chi_chip = s.chi * s.out.chi_prime;
    let eta1 = (1.0 - eta + g * eta) / f;
    let x1 = g * eta / (1.0 - eta + g * eta);
    let g_n = g.powi(-(s.cutoff as i32));
    let chip2 = s.out.chi_prime * s.out.chi_prime;

    let mut acc = CompensatedSum::new();
    acc.add(g_n / (1.0 - chip2));
    for n in n_cut + 1..=n_terms.max(n_cut + 1) {
        let b = (n - n_cut) as u32;
        let weak = (chi_chip * eta1).powi(n as i32) * reg_beta_i(x1, s.cutoff + 1, b)?.value();
        let strong =
            g_n * chip2.powi(n as i32) * reg_beta_i(s.out.eta_prime, s.cutoff + 1, b)?.value();
        acc.add(weak - strong);
    }
    Ok(acc.value())
}

/// Fidelity of the heralded state with the `(chi', eta')` purification,
/// a lower bound on the mixed-state fidelity of the accessible modes.
pub fn fidelity_epr_lower_bound(chi: f64, eta: f64, spec: &AmplifierSpec) -> Result<f64> {
    let s = setup(chi, eta, spec)?;
    let n_terms = series_terms(s.out.chi_prime);
    fidelity_from_series(&s, n_terms)
}

/// [`fidelity_epr_lower_bound`] with an explicit number of series terms.
pub fn fidelity_epr_lower_bound_terms(
    chi: f64,
    eta: f64,
    spec: &AmplifierSpec,
    n_terms: usize,
) -> Result<f64> {
    let s = setup(chi, eta, spec)?;
    fidelity_from_series(&s, n_terms)
}

fn fidelity_from_series(s: &EprSetup, n_terms: usize) -> Result<f64> {
    let p = prob_epr_series(s, n_terms)?;
    Ok(fidelity_times_prob(s, n_terms)? / p)
}

fn fidelity_times_prob(s: &EprSetup, n_terms: usize) -> Result<f64> {
    let overlap = overlap_series(s, n_terms)?;
    let chi2 = s.chi * s.chi;
    let chip2 = s.out.chi_prime * s.out.chi_prime;
    Ok((1.0 - chi2) * (1.0 - chip2) * overlap * overlap)
}

/// `F * P` in closed form.
pub fn fidelity_prob_product(chi: f64, eta: f64, spec: &AmplifierSpec) -> Result<f64> {
    let s = setup(chi, eta, spec)?;
    fidelity_times_prob(&s, series_terms(s.out.chi_prime))
}

/// Amplifier performance at a fixed target `chi'`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EprResult {
    pub chi_in: f64,
    pub p_success: f64,
    pub fidelity_lower_bound: f64,
    pub epsilon_epr: f64,
    pub params_out: TransformedParams,
}

/// Evaluates the amplifier on the input that reaches `chi_prime` at gain `g`.
pub fn evaluate_at_target(chi_prime: f64, eta: f64, spec: &AmplifierSpec) -> Result<EprResult> {
    if !(0.0..1.0).contains(&chi_prime) {
        return domain(format!(
            "target squeezing must lie in [0, 1), got {chi_prime}"
        ));
    }
    let chi_in = chi_for_target(chi_prime, eta, spec.g())?;
    let s = setup(chi_in, eta, spec)?;
    let n_terms = series_terms(s.out.chi_prime);
    let p = prob_epr_series(&s, n_terms)?;
    let fp = fidelity_times_prob(&s, n_terms)?;
    Ok(EprResult {
        chi_in,
        p_success: p,
        fidelity_lower_bound: fp / p,
        epsilon_epr: criterion(s.out.chi_prime, s.out.eta_prime),
        params_out: s.out,
    })
}

/// Leading large-gain behaviour at fixed `chi'`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Asymptotics {
    /// `g^{-2N} (1 - chi'^{2N+2}) / (1 - chi'^2)`
    pub p_leading: f64,
    /// `1 - chi'^{2N+2}`, approached from above as `g -> inf`.
    pub f_limit: f64,
}

pub fn asymptotics(chi_prime: f64, spec: &AmplifierSpec) -> Result<Asymptotics> {
    if !(0.0..1.0).contains(&chi_prime) {
        return domain(format!(
            "target squeezing must lie in [0, 1), got {chi_prime}"
        ));
    }
    let n = spec.cutoff() as i32;
    let floor = chi_prime.powi(2 * n + 2);
    Ok(Asymptotics {
        p_leading: spec.g().powi(-2 * n) * (1.0 - floor) / (1.0 - chi_prime * chi_prime),
        f_limit: 1.0 - floor,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CutoffFlag {
    Within,
    /// The bound is negative: even `N = 0` has `1 - chi'^2 >= f_min`.
    BelowZero,
    /// The bound exceeds [`CUTOFF_CAP`] (`chi' -> 1`).
    Capped,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CutoffBound {
    pub n: u32,
    pub flag: CutoffFlag,
}

/// `floor(ln(1 - f_min) / (2 ln chi') - 1)`.
///
/// Cutoffs strictly above the unfloored bound have an asymptotic fidelity
/// `1 - chi'^{2N+2} >= f_min`, so their gain is limited only by the success
/// probability; the first such cutoff is `n + 1`. Larger cutoffs lose
/// probability faster and cannot improve the constrained optimum.
pub fn max_cutoff(f_min: f64, chi_prime: f64) -> Result<CutoffBound> {
    if !(f_min > 0.0 && f_min < 1.0) {
        return domain(format!("f_min must lie in (0, 1), got {f_min}"));
    }
    if !(0.0..1.0).contains(&chi_prime) {
        return domain(format!("chi' must lie in [0, 1), got {chi_prime}"));
    }
    let bound = (1.0 - f_min).ln() / (2.0 * chi_prime.ln()) - 1.0;
    Ok(if bound < 0.0 {
        CutoffBound {
            n: 0,
            flag: CutoffFlag::BelowZero,
        }
    } else if bound >= CUTOFF_CAP as f64 {
        CutoffBound {
            n: CUTOFF_CAP,
            flag: CutoffFlag::Capped,
        }
    } else {
        CutoffBound {
            n: bound.floor() as u32,
            flag: CutoffFlag::Within,
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn spec(g: f64, n: u32) -> AmplifierSpec {
        AmplifierSpec::new(g, n).unwrap()
    }

    #[test]
    fn params_validation() {
        assert!(LossyEprParams::new(1.0, 0.5).is_err());
        assert!(LossyEprParams::new(-0.1, 0.5).is_err());
        assert!(LossyEprParams::new(0.5, 1.01).is_err());
        assert!(LossyEprParams::new(0.0, 0.0).is_ok());
    }

    #[test]
    fn lossy_epr_examples() {
        let vac = make_lossy_epr(&LossyEprParams::new(0.0, 0.7).unwrap(), 5).unwrap();
        for ((n, _), a) in vac.iter() {
            assert_eq!(a, if n == 0 { 1.0 } else { 0.0 });
        }
        let pure = make_lossy_epr(&LossyEprParams::new(0.5, 1.0).unwrap(), 10).unwrap();
        for ((n, t), a) in pure.iter() {
            let expect = if t == n {
                0.75f64.sqrt() * 0.5f64.powi(n as i32)
            } else {
                0.0
            };
            assert_abs_diff_eq!(a, expect, epsilon = 1e-15);
        }
        let lossy = make_lossy_epr(&LossyEprParams::new(0.5, 0.3).unwrap(), 40).unwrap();
        assert_abs_diff_eq!(lossy.norm_sqr(), 1.0 - 0.5f64.powi(82), epsilon = 1e-12);
    }

    #[test]
    fn transform_examples() {
        let p = LossyEprParams::new(0.2, 0.25).unwrap();
        let id = transform_params(&p, 1.0).unwrap();
        assert_eq!((id.chi_prime, id.eta_prime, id.f), (0.2, 0.25, 1.0));

        let t = transform_params(&p, 2.0).unwrap();
        assert_abs_diff_eq!(t.f, 1.75f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(t.chi_prime, 0.264575131106459, epsilon = 1e-12);
        assert_abs_diff_eq!(t.eta_prime, 0.571428571428571, epsilon = 1e-12);

        let pure = transform_params(&LossyEprParams::new(0.2, 1.0).unwrap(), 3.0).unwrap();
        assert_abs_diff_eq!(pure.chi_prime, 0.6, epsilon = 1e-15);
        assert_eq!(pure.eta_prime, 1.0);
        assert!(transform_params(&p, 0.5).is_err());
    }

    #[test]
    fn chi_for_target_examples() {
        assert_eq!(chi_for_target(0.5, 0.3, 1.0).unwrap(), 0.5);
        assert_abs_diff_eq!(
            chi_for_target(0.5, 0.25, 2.0).unwrap(),
            0.377964473009227,
            epsilon = 1e-12
        );
        let chi = chi_for_target(0.7, 0.4, 2.7).unwrap();
        let back = transform_params(&LossyEprParams::new(chi, 0.4).unwrap(), 2.7).unwrap();
        assert_abs_diff_eq!(back.chi_prime, 0.7, epsilon = 1e-12);
        assert!(matches!(
            chi_for_target(1.5, 0.0, 1.0),
            Err(NlaError::UnreachableTarget { .. })
        ));
    }

    #[test]
    fn criterion_examples() {
        assert_eq!(epr_criterion(&LossyEprParams::new(0.0, 0.4).unwrap()), 1.0);
        assert_abs_diff_eq!(criterion(1.0, 0.25), 0.5625, epsilon = 1e-15);
        let near = epr_criterion(&LossyEprParams::new(1.0 - 1e-9, 0.25).unwrap());
        assert_abs_diff_eq!(near, 0.5625, epsilon = 1e-8);
        assert_abs_diff_eq!(
            epr_criterion(&LossyEprParams::new(0.5, 0.25).unwrap()),
            0.81,
            epsilon = 1e-15
        );
    }

    #[test]
    fn prob_identity_gain() {
        assert_abs_diff_eq!(
            prob_epr(0.6, 0.4, &spec(1.0, 3)).unwrap(),
            1.0,
            epsilon = 1e-13
        );
        assert_abs_diff_eq!(
            fidelity_epr_lower_bound(0.6, 0.4, &spec(1.0, 3)).unwrap(),
            1.0,
            epsilon = 1e-13
        );
    }

    #[test]
    fn prob_dark_channel() {
        // eta = 0 leaves the amplified mode in vacuum: P = g^{-2N}.
        for n in 1..4 {
            let p = prob_epr(0.6, 0.0, &spec(2.0, n)).unwrap();
            assert_abs_diff_eq!(p, 2f64.powi(-2 * n as i32), epsilon = 1e-15);
        }
    }

    #[test]
    fn divergent_input_is_rejected() {
        assert!(matches!(
            prob_epr(0.5, 1.0, &spec(2.5, 1)),
            Err(NlaError::Divergent { .. })
        ));
        assert!(fidelity_epr_lower_bound(0.5, 1.0, &spec(2.0, 1)).is_err());
    }

    #[test]
    fn asymptotic_examples() {
        assert_eq!(asymptotics(0.0, &spec(3.0, 2)).unwrap().f_limit, 1.0);
        let a = asymptotics(0.5, &spec(100.0, 1)).unwrap();
        assert_abs_diff_eq!(a.f_limit, 0.9375, epsilon = 1e-15);
        assert_abs_diff_eq!(a.p_leading, 1e-4 * 0.9375 / 0.75, epsilon = 1e-18);

        let chi = chi_for_target(0.5, 0.3, 100.0).unwrap();
        let p = prob_epr(chi, 0.3, &spec(100.0, 1)).unwrap();
        assert!((p * 1e4 / (0.9375 / 0.75) - 1.0).abs() <= 0.05);
    }

    #[test]
    fn max_cutoff_examples() {
        assert_eq!(
            max_cutoff(0.99, 0.5).unwrap(),
            CutoffBound {
                n: 2,
                flag: CutoffFlag::Within
            }
        );
        assert_eq!(
            max_cutoff(0.99, 0.8).unwrap(),
            CutoffBound {
                n: 9,
                flag: CutoffFlag::Within
            }
        );
        // ln(1 - f) / (2 ln chi') -> 0 as chi' -> 0
        assert_eq!(
            max_cutoff(0.99, 0.0).unwrap(),
            CutoffBound {
                n: 0,
                flag: CutoffFlag::BelowZero
            }
        );
        assert_eq!(
            max_cutoff(0.99, 1e-300).unwrap().flag,
            CutoffFlag::BelowZero
        );
        assert_eq!(
            max_cutoff(0.99, 0.9999).unwrap(),
            CutoffBound {
                n: CUTOFF_CAP,
                flag: CutoffFlag::Capped
            }
        );
        assert!(max_cutoff(1.0, 0.5).is_err());
        assert!(max_cutoff(0.9, 1.0).is_err());
    }

    #[test]
    fn cutoff_bound_separates_fidelity_floors() {
        for &(f_min, chi_p) in &[(0.99, 0.5), (0.99, 0.8), (0.95, 0.3), (0.999, 0.9)] {
            let b = max_cutoff(f_min, chi_p).unwrap();
            let floor = |n: u32| 1.0 - chi_p.powi(2 * n as i32 + 2);
            assert!(floor(b.n + 1) >= f_min);
            assert!(floor(b.n) < f_min);
        }
    }

    #[test]
    fn evaluate_at_target_consistency() {
        let r = evaluate_at_target(0.5, 0.3, &spec(2.0, 2)).unwrap();
        assert_abs_diff_eq!(r.params_out.chi_prime, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(
            r.p_success,
            prob_epr(r.chi_in, 0.3, &spec(2.0, 2)).unwrap(),
            epsilon = 1e-15
        );
        assert!(r.epsilon_epr < criterion(0.5, 0.3));
    }
}

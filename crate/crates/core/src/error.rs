use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NlaError {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("target squeezing {chi_prime} is unreachable at eta = {eta}, g = {g} (input chi would be {chi})")]
    UnreachableTarget {
        chi_prime: f64,
        eta: f64,
        g: f64,
        chi: f64,
    },

    #[error("amplified state does not converge: chi' = {chi_prime} >= 1")]
    Divergent { chi_prime: f64 },

    #[error("no cutoff N <= {cap} reaches the fidelity target {f_min}")]
    CutoffCap { cap: u32, f_min: f64 },

    #[error("truncation tail {tail:e} exceeds the allowed bound {bound:e} at n_max = {n_max}")]
    TailBound { tail: f64, bound: f64, n_max: usize },

    #[error("constraints infeasible: {0}")]
    Infeasible(String),
}

pub type Result<T> = std::result::Result<T, NlaError>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(NlaError::Domain(msg.into()))
}

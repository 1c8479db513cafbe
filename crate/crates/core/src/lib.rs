//! Optimal measurement-based noiseless linear amplifier.
//!
//! The amplifier is a two-outcome measurement whose success operator acts as
//! `g^{a†a}` up to a cutoff `N` and as the identity above it. This crate
//! builds that measurement and its unitary dilation, evaluates exact closed
//! forms for coherent and one-sided lossy EPR inputs, checks every closed form
//! against an independent truncated Fock-space [`oracle`], and optimizes the
//! EPR criterion under fidelity and success-probability constraints.

// NaN-rejecting range checks read as `!(x >= 0.0)` on purpose.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod coherent;
pub mod epr;
pub mod error;
pub mod fock;
pub mod optimizer;
pub mod oracle;
pub mod special_functions;
pub mod summation;
pub mod validation;

pub use error::{NlaError, Result};
pub use fock::{AmplifierSpec, DiagonalOperator, FockVector, JointUnitary};

//! Structured precoding for spatially correlated MIMO channels.
//!
//! The crate is `no_std` (with `alloc`) and carries no I/O. It provides:
//!
//! - [`matcore`]: dense complex matrices, Hermitian eigendecomposition, SVD,
//!   determinants, and checkers for the eigenvalue inequalities used below.
//! - [`majorization`]: majorization orders, Schur-convexity probes and the
//!   unitary-stochastic construction used to equalize per-stream MSE.
//! - [`channel`]: separable and canonical correlation models, sampling,
//!   covariances and matching metrics.
//! - [`precoding`]: perfect-CSI and statistical precoders, waterfilling and
//!   the projected-gradient statistical power optimizer.
//! - [`link`]: linear MMSE receiver quantities (SINR, MSE, mutual
//!   information, error probabilities, Q-function).
//! - [`metrics`]: Monte Carlo relative-loss estimators, gap statistics,
//!   closed-form bound evaluators and eigenvalue-support checks.
//!
//! Monte Carlo work is dispatched through [`exec::TrialExecutor`] so a host
//! crate can plug in a thread pool without changing any result bits.
#![cfg_attr(not(test), no_std)]
// Negated comparisons such as `!(x > 0.0)` are used on purpose to reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod channel;
pub mod error;
pub mod exec;
mod fmath;
pub mod link;
pub mod majorization;
pub mod matcore;
pub mod metrics;
pub mod precoding;
pub mod rng;

pub use error::{Error, Result};
pub use matcore::{CMatrix, C64};

/// Converts an SNR in dB to linear scale.
pub fn db_to_linear(db: f64) -> f64 {
    fmath::powf(10.0, db / 10.0)
}

/// Converts a linear SNR to dB.
pub fn linear_to_db(x: f64) -> f64 {
    10.0 * fmath::log10(x)
}

//! Linear MMSE receiver quantities and error probabilities for a given
//! channel and fully scaled precoding matrix.

use alloc::vec::Vec;

use crate::error::{bail, Result};
use crate::fmath;
use crate::matcore::{hermitian_eigenvalues, inverse, solve, CMatrix};

/// `P_k ≈ α·Q(β·√SINR_k)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Constellation {
    pub alpha: f64,
    pub beta: f64,
}

impl Constellation {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha > 0.0 && beta > 0.0) || !alpha.is_finite() || !beta.is_finite() {
            bail!(InvalidArgument, "constellation constants must be positive, got alpha = {}, beta = {}", alpha, beta);
        }
        Ok(Self { alpha, beta })
    }

    pub fn bpsk() -> Self {
        Self { alpha: 1.0, beta: core::f64::consts::SQRT_2 }
    }

    pub fn qpsk() -> Self {
        Self { alpha: 2.0, beta: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinkMetrics {
    pub sinr: Vec<f64>,
    pub mse: Vec<f64>,
    /// Bits per channel use.
    pub mutual_info: f64,
    pub p_stream: Vec<f64>,
    pub p_any: f64,
    pub p_avg: f64,
}

fn check_dims(h: &CMatrix, f: &CMatrix) -> Result<()> {
    if h.cols() != f.rows() {
        bail!(Dimension, "H is {}x{} but F has {} rows", h.rows(), h.cols(), f.rows());
    }
    Ok(())
}

/// `I + FᴴHᴴHF`.
pub fn stream_gram(h: &CMatrix, f: &CMatrix) -> Result<CMatrix> {
    check_dims(h, f)?;
    let hf = h.try_mul(f)?;
    let g = hf.adjoint_mul(&hf)?;
    Ok((&CMatrix::identity(f.cols()) + &g).hermitian_part())
}

/// Column `k` is `(HFFᴴHᴴ + I)⁻¹ H f_k`.
pub fn mmse_filters(h: &CMatrix, f: &CMatrix) -> Result<CMatrix> {
    check_dims(h, f)?;
    let hf = h.try_mul(f)?;
    let cov = &(&hf * &hf.adjoint()) + &CMatrix::identity(h.rows());
    solve(&cov, &hf)
}

/// Per-stream MSE, the diagonal of `(I + FᴴHᴴHF)⁻¹`.
pub fn mse(h: &CMatrix, f: &CMatrix) -> Result<Vec<f64>> {
    let inv = inverse(&stream_gram(h, f)?)?;
    Ok(inv.diag_real().into_iter().map(|x| x.clamp(f64::MIN_POSITIVE, 1.0)).collect())
}

/// `SINR_k = 1/MSE_k − 1`.
pub fn sinr(h: &CMatrix, f: &CMatrix) -> Result<Vec<f64>> {
    Ok(mse(h, f)?.into_iter().map(|e| (1.0 / e - 1.0).max(0.0)).collect())
}

/// `log₂ det(I + FᴴHᴴHF)` from the Hermitian eigenvalues.
pub fn mutual_info(h: &CMatrix, f: &CMatrix) -> Result<f64> {
    let ev = hermitian_eigenvalues(&stream_gram(h, f)?)?;
    Ok(ev.iter().map(|&x| fmath::log2(x.max(1.0))).sum())
}

/// Same quantity in nats.
pub fn mutual_info_nats(h: &CMatrix, f: &CMatrix) -> Result<f64> {
    Ok(mutual_info(h, f)? * core::f64::consts::LN_2)
}

/// Gaussian tail `Q(x) = ½ erfc(x/√2)`.
pub fn q_function(x: f64) -> f64 {
    0.5 * fmath::erfc(x / core::f64::consts::SQRT_2)
}

/// `e^{−x²/2}/(x√(2π)) · (1 − 1/x², 1)`.
pub fn q_bounds(x: f64) -> Result<(f64, f64)> {
    if !(x > 0.0) || !x.is_finite() {
        bail!(InvalidArgument, "Q bounds need finite x > 0, got {}", x);
    }
    let upper = fmath::exp(-0.5 * x * x) / (x * fmath::sqrt(2.0 * core::f64::consts::PI));
    Ok((upper * (1.0 - 1.0 / (x * x)), upper))
}

pub fn stream_error_prob(sinr: &[f64], c: Constellation) -> Vec<f64> {
    sinr.iter().map(|&s| (c.alpha * q_function(c.beta * fmath::sqrt(s.max(0.0)))).clamp(0.0, 1.0)).collect()
}

fn check_probs(p: &[f64]) -> Result<()> {
    if p.iter().any(|x| !(0.0..=1.0).contains(x)) {
        bail!(InvalidArgument, "probabilities must lie in [0, 1]");
    }
    Ok(())
}

/// Probability that at least one stream is in error.
pub fn error_prob_any(p: &[f64]) -> Result<f64> {
    check_probs(p)?;
    // Sum of logs keeps tiny probabilities from rounding away.
    Ok(-fmath::exp_m1(p.iter().map(|&x| fmath::ln_1p(-x)).sum()))
}

pub fn error_prob_avg(p: &[f64]) -> Result<f64> {
    check_probs(p)?;
    if p.is_empty() {
        bail!(InvalidArgument, "no streams");
    }
    Ok(p.iter().sum::<f64>() / p.len() as f64)
}

impl LinkMetrics {
    pub fn evaluate(h: &CMatrix, f: &CMatrix, c: Constellation) -> Result<Self> {
        let mse = mse(h, f)?;
        let sinr: Vec<f64> = mse.iter().map(|e| (1.0 / e - 1.0).max(0.0)).collect();
        let mutual_info = mutual_info(h, f)?;
        let p_stream = stream_error_prob(&sinr, c);
        let p_any = error_prob_any(&p_stream)?;
        let p_avg = error_prob_avg(&p_stream)?;
        Ok(Self { sinr, mse, mutual_info, p_stream, p_any, p_avg })
    }
}

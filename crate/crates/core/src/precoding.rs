//! Precoder constructions with perfect or statistical transmit CSI.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::channel::ChannelModel;
use crate::error::{bail, Error, Result};
use crate::fmath;
use crate::majorization::unitary_stochastic_from_majorization;
use crate::matcore::{det, inverse, svd, CMatrix};

/// Relative threshold below which singular values of `H` count as zero.
pub const RANK_TOL: f64 = 1e-10;

/// `F = √(ρ/M) · v_f · diag(lambda_f)^{1/2} · mix`.
#[derive(Debug, Clone, PartialEq)]
pub struct Precoder {
    pub v_f: CMatrix,
    pub lambda_f: Vec<f64>,
    pub rho: f64,
    /// Optional unitary applied on the right of the power loading.
    pub mix: Option<CMatrix>,
}

impl Precoder {
    pub fn new(v_f: CMatrix, lambda_f: Vec<f64>, rho: f64) -> Result<Self> {
        let m = v_f.cols();
        if lambda_f.len() != m {
            bail!(Dimension, "lambda_f has {} entries for {} streams", lambda_f.len(), m);
        }
        if !(rho > 0.0) || !rho.is_finite() {
            bail!(InvalidArgument, "rho must be positive and finite, got {}", rho);
        }
        if lambda_f.iter().any(|x| !(*x >= 0.0) || !x.is_finite()) {
            bail!(InvalidArgument, "lambda_f must be finite and non-negative");
        }
        if lambda_f.iter().sum::<f64>() > m as f64 + 1e-10 {
            bail!(InvalidArgument, "trace(lambda_f) exceeds {}", m);
        }
        let dev = v_f.orthonormality_error();
        if dev > 1e-10 {
            return Err(Error::NotOrthonormal(dev));
        }
        Ok(Self { v_f, lambda_f, rho, mix: None })
    }

    pub fn with_mix(mut self, mix: CMatrix) -> Result<Self> {
        let m = self.streams();
        if mix.rows() != m || mix.cols() != m {
            bail!(Dimension, "mixing matrix must be {}x{}", m, m);
        }
        let dev = mix.orthonormality_error();
        if dev > 1e-10 {
            return Err(Error::NotOrthonormal(dev));
        }
        self.mix = Some(mix);
        Ok(self)
    }

    pub fn streams(&self) -> usize {
        self.v_f.cols()
    }

    /// The fully scaled precoding matrix used by the link functions.
    pub fn effective(&self) -> CMatrix {
        let m = self.streams() as f64;
        let amp: Vec<f64> = self.lambda_f.iter().map(|&l| fmath::sqrt(self.rho / m * l)).collect();
        let f = self.v_f.scale_columns(&amp);
        match &self.mix {
            Some(g) => &f * g,
            None => f,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WaterfillResult {
    pub n_h: usize,
    pub mu_h: f64,
    pub lambda_wf: Vec<f64>,
}

/// Waterfilling over the gains `lambda` (non-increasing, positive) with
/// total power `rho`.
pub fn waterfill(lambda: &[f64], rho: f64) -> Result<WaterfillResult> {
    if lambda.is_empty() {
        bail!(InvalidArgument, "no eigenvalues to waterfill");
    }
    if !(rho > 0.0) || !rho.is_finite() {
        bail!(InvalidArgument, "rho must be positive and finite, got {}", rho);
    }
    if lambda.iter().any(|x| !(*x > 0.0) || !x.is_finite()) {
        bail!(InvalidArgument, "eigenvalues must be positive and finite");
    }
    if lambda.windows(2).any(|w| w[1] > w[0]) {
        bail!(InvalidArgument, "eigenvalues must be non-increasing");
    }
    let mut n_h = 1;
    for k in 2..=lambda.len() {
        let lk = lambda[k - 1];
        let need: f64 = lambda[..k].iter().map(|&li| (li - lk) / (li * lk)).sum();
        if need <= rho {
            n_h = k;
        }
    }
    let inv_sum: f64 = lambda[..n_h].iter().map(|l| 1.0 / l).sum();
    let mu_h = (rho + inv_sum) / n_h as f64;
    let mut lambda_wf = vec![0.0; lambda.len()];
    for i in 0..n_h {
        lambda_wf[i] = (mu_h - 1.0 / lambda[i]).max(0.0);
    }
    Ok(WaterfillResult { n_h, mu_h, lambda_wf })
}

fn check_streams(m: usize, rho: f64) -> Result<()> {
    if m == 0 {
        bail!(InvalidArgument, "stream count must be positive");
    }
    if !(rho > 0.0) || !rho.is_finite() {
        bail!(InvalidArgument, "rho must be positive and finite, got {}", rho);
    }
    Ok(())
}

// Top-m right singular vectors and the matching eigenvalues of HᴴH.
fn dominant_modes(h: &CMatrix, m: usize) -> Result<(CMatrix, Vec<f64>)> {
    let s = svd(h)?;
    let rank = s.rank(RANK_TOL);
    if m > rank {
        return Err(Error::RankDeficient { needed: m, found: rank });
    }
    let gains = s.gram_eigenvalues()[..m].to_vec();
    Ok((s.right.leading_columns(m), gains))
}

/// Capacity-achieving precoder: dominant right singular vectors with
/// waterfilled powers, stored as `lambda_f = (M/ρ)·Λ_wf`.
pub fn perfect_unconstrained(h: &CMatrix, m: usize, rho: f64) -> Result<Precoder> {
    check_streams(m, rho)?;
    let (v, gains) = dominant_modes(h, m)?;
    let wf = waterfill(&gains, rho)?;
    let lf: Vec<f64> = wf.lambda_wf.iter().map(|x| x * m as f64 / rho).collect();
    let total: f64 = lf.iter().sum();
    // Absorb rounding so the trace check never trips on the last ulp.
    let lf = if total > m as f64 { lf.iter().map(|x| x * m as f64 / total).collect() } else { lf };
    Precoder::new(v, lf, rho)
}

pub fn perfect_semiunitary(h: &CMatrix, m: usize, rho: f64) -> Result<Precoder> {
    check_streams(m, rho)?;
    let (v, _) = dominant_modes(h, m)?;
    Precoder::new(v, vec![1.0; m], rho)
}

/// Semiunitary precoder rotated so every stream sees the same MSE.
pub fn perfect_equalized(h: &CMatrix, m: usize, rho: f64) -> Result<Precoder> {
    check_streams(m, rho)?;
    let (v, gains) = dominant_modes(h, m)?;
    let c = rho / m as f64;
    let mse: Vec<f64> = gains.iter().map(|g| 1.0 / (1.0 + c * g)).collect();
    let gamma = equalizing_rotation(&mse)?;
    Precoder::new(&v * &gamma, vec![1.0; m], rho)
}

fn equalizing_rotation(mse: &[f64]) -> Result<CMatrix> {
    let mean = mse.iter().sum::<f64>() / mse.len() as f64;
    let target = vec![mean; mse.len()];
    Ok(unitary_stochastic_from_majorization(&target, mse)?.gamma)
}

/// Which family of stream objectives a fixed power loading targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Objective {
    SchurConcave,
    SchurConvex,
}

/// Fixed power loading on the dominant modes; for Schur-convex objectives
/// the streams are additionally mixed so their MSEs coincide.
pub fn perfect_fixed(h: &CMatrix, m: usize, rho: f64, lambda_fixed: &[f64], objective: Objective) -> Result<Precoder> {
    check_streams(m, rho)?;
    if lambda_fixed.len() != m {
        bail!(Dimension, "lambda_fixed has {} entries for {} streams", lambda_fixed.len(), m);
    }
    if lambda_fixed.iter().sum::<f64>() > m as f64 + 1e-10 {
        bail!(InvalidArgument, "trace(lambda_fixed) exceeds {}", m);
    }
    let (v, gains) = dominant_modes(h, m)?;
    let p = Precoder::new(v, lambda_fixed.to_vec(), rho)?;
    match objective {
        Objective::SchurConcave => Ok(p),
        Objective::SchurConvex => {
            let c = rho / m as f64;
            let mse: Vec<f64> = gains.iter().zip(lambda_fixed).map(|(g, l)| 1.0 / (1.0 + c * l * g)).collect();
            let gamma = equalizing_rotation(&mse)?;
            p.with_mix(gamma)
        }
    }
}

fn check_stat_rank(model: &ChannelModel, m: usize) -> Result<()> {
    let rank = model.transmit_rank();
    if m > rank {
        return Err(Error::RankDeficient { needed: m, found: rank });
    }
    Ok(())
}

/// Dominant eigenvectors of the transmit covariance with equal power.
pub fn stat_semiunitary(model: &ChannelModel, m: usize, rho: f64) -> Result<Precoder> {
    check_streams(m, rho)?;
    check_stat_rank(model, m)?;
    Precoder::new(model.u_t().leading_columns(m), vec![1.0; m], rho)
}

/// SNR above which the fixed statistical loading reverts to equal power.
pub fn stat_threshold_snr(lambda_t: &[f64], m: usize, alpha: f64) -> Result<f64> {
    if !(alpha > 1.0) {
        bail!(InvalidArgument, "alpha must exceed 1, got {}", alpha);
    }
    if m == 0 || m > lambda_t.len() || !(lambda_t[m - 1] > 0.0) {
        bail!(InvalidArgument, "lambda_t must have {} positive leading entries", m);
    }
    Ok(alpha * m as f64 / lambda_t[m - 1])
}

/// Power proportional to the transmit eigenvalues below the threshold SNR,
/// equal power at or above it.
pub fn stat_fixed(model: &ChannelModel, m: usize, rho: f64, alpha: f64) -> Result<Precoder> {
    check_streams(m, rho)?;
    check_stat_rank(model, m)?;
    let lt = model.lambda_t();
    let snr_t = stat_threshold_snr(&lt, m, alpha)?;
    let lf = if rho < snr_t {
        let s: f64 = lt[..m].iter().sum();
        lt[..m].iter().map(|x| m as f64 * x / s).collect()
    } else {
        vec![1.0; m]
    };
    Precoder::new(model.u_t().leading_columns(m), lf, rho)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StatPowerOptions {
    pub batch: usize,
    /// `None` selects `0.1/ρ`.
    pub step: Option<f64>,
    pub tol: f64,
    pub max_iters: usize,
}

impl Default for StatPowerOptions {
    fn default() -> Self {
        Self { batch: 2000, step: None, tol: 1e-6, max_iters: 10_000 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StatPowerResult {
    pub lambda: Vec<f64>,
    pub objective: f64,
    pub iterations: usize,
    /// False when `max_iters` ran out before the tolerance was met.
    pub converged: bool,
}

/// Euclidean projection onto `{x ≥ 0, Σx ≤ budget}`.
pub fn project_capped_simplex(x: &[f64], budget: f64) -> Vec<f64> {
    let clipped: Vec<f64> = x.iter().map(|v| v.max(0.0)).collect();
    if clipped.iter().sum::<f64>() <= budget {
        return clipped;
    }
    let mut s = x.to_vec();
    s.sort_by(|a, b| b.total_cmp(a));
    let mut acc = 0.0;
    let mut theta = 0.0;
    for (i, v) in s.iter().enumerate() {
        acc += v;
        let t = (acc - budget) / (i + 1) as f64;
        if v - t > 0.0 {
            theta = t;
        }
    }
    x.iter().map(|v| (v - theta).max(0.0)).collect()
}

/// Sample-average objective `mean ln det(I + c·A_n Λ)` over the Gram
/// matrices of the truncated channel draws.
pub fn stat_power_objective(grams: &[CMatrix], lambda: &[f64], c: f64) -> Result<f64> {
    let mut total = 0.0;
    for a in grams {
        let g = &CMatrix::identity(lambda.len()) + &a.scale_columns(lambda).scale(c);
        total += fmath::ln(det(&g)?.re);
    }
    Ok(total / grams.len() as f64)
}

fn stat_power_gradient(grams: &[CMatrix], lambda: &[f64], c: f64) -> Result<Vec<f64>> {
    let m = lambda.len();
    let mut grad = vec![0.0; m];
    for a in grams {
        let g = &CMatrix::identity(m) + &a.scale_columns(lambda).scale(c);
        let w = &inverse(&g)? * a;
        for k in 0..m {
            grad[k] += c * w[(k, k)].re;
        }
    }
    grad.iter_mut().for_each(|x| *x /= grams.len() as f64);
    Ok(grad)
}

/// Gram matrices `H̃ᴴH̃` of the first `m` columns of `batch` draws of `H_ind`.
pub fn truncated_grams<R: Rng + ?Sized>(model: &ChannelModel, m: usize, batch: usize, rng: &mut R) -> Vec<CMatrix> {
    let cols: Vec<usize> = (0..m).collect();
    let rows: Vec<usize> = (0..model.n_r()).collect();
    (0..batch)
        .map(|_| {
            let h = model.sample(rng).h_ind.submatrix(&rows, &cols);
            h.adjoint_mul(&h).expect("square gram")
        })
        .collect()
}

/// Projected gradient ascent for the ergodic-capacity power loading along
/// the statistical eigenvectors.
pub fn optimize_stat_power<R: Rng + ?Sized>(
    model: &ChannelModel,
    m: usize,
    rho: f64,
    options: &StatPowerOptions,
    rng: &mut R,
) -> Result<StatPowerResult> {
    check_streams(m, rho)?;
    if m > model.n_t() {
        bail!(InvalidArgument, "stream count {} exceeds n_t = {}", m, model.n_t());
    }
    if options.batch < 100 {
        bail!(InvalidArgument, "batch must be at least 100, got {}", options.batch);
    }
    if !(options.tol > 0.0) || options.max_iters == 0 {
        bail!(InvalidArgument, "tol must be positive and max_iters non-zero");
    }
    let grams = truncated_grams(model, m, options.batch, rng);
    optimize_stat_power_on(&grams, rho, options)
}

/// Same ascent on a fixed set of Gram matrices.
pub fn optimize_stat_power_on(grams: &[CMatrix], rho: f64, options: &StatPowerOptions) -> Result<StatPowerResult> {
    let m = grams.first().map(|g| g.rows()).unwrap_or(0);
    if m == 0 {
        bail!(InvalidArgument, "no samples");
    }
    let budget = m as f64;
    let c = rho / budget;
    let base_step = options.step.unwrap_or(0.1 / rho);
    if !(base_step > 0.0) {
        bail!(InvalidArgument, "step must be positive");
    }
    let mut lambda = vec![1.0; m];
    let mut value = stat_power_objective(grams, &lambda, c)?;
    let mut step = base_step;
    for it in 0..options.max_iters {
        let grad = stat_power_gradient(grams, &lambda, c)?;
        let probe = project_capped_simplex(&add_scaled(&lambda, &grad, 1.0), budget);
        let pg: f64 = fmath::sqrt(probe.iter().zip(&lambda).map(|(a, b)| (a - b) * (a - b)).sum());
        if pg < options.tol {
            return Ok(StatPowerResult { lambda, objective: value, iterations: it, converged: true });
        }
        let mut accepted = false;
        let mut t = step;
        for _ in 0..60 {
            let cand = project_capped_simplex(&add_scaled(&lambda, &grad, t), budget);
            let v = stat_power_objective(grams, &cand, c)?;
            if v >= value {
                let moved = cand.iter().zip(&lambda).any(|(a, b)| a != b);
                lambda = cand;
                value = v;
                accepted = moved;
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            return Ok(StatPowerResult { lambda, objective: value, iterations: it + 1, converged: true });
        }
        // Let the step recover after backtracking.
        step = (t * 2.0).min(base_step * 1e3);
    }
    Ok(StatPowerResult { lambda, objective: value, iterations: options.max_iters, converged: false })
}

fn add_scaled(x: &[f64], d: &[f64], t: f64) -> Vec<f64> {
    x.iter().zip(d).map(|(a, b)| a + t * b).collect()
}

/// `Γ` realizing equal MSEs from a given MSE vector.
pub fn equalizer_for(mse: &[f64]) -> Result<CMatrix> {
    equalizing_rotation(mse)
}

//! Finite-size checks of the extreme-eigenvalue support of wide random
//! matrices.

use alloc::vec::Vec;

use crate::error::{bail, Result};
use crate::fmath;
use crate::matcore::{hermitian_eigenvalues, CMatrix, RMatrix};
use crate::rng::{complex_gaussian, stream};

#[derive(Debug, Clone, PartialEq)]
pub struct RmtReport {
    pub trials: usize,
    /// Trials with any eigenvalue outside the slackened support.
    pub violations: usize,
    pub fraction: f64,
    /// Smallest and largest normalized eigenvalue seen over all trials.
    pub empirical_min: f64,
    pub empirical_max: f64,
    /// Nominal support edges before slack (per eigenvalue index for a
    /// variance profile, otherwise a single interval).
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    /// Spread constant used for the edges.
    pub gamma: f64,
    /// Smallest spread constant that would have covered every trial.
    pub fitted_gamma: f64,
}

/// Samples `p × n` matrices `X` and compares the eigenvalues of `XXᴴ/n`
/// (or `XΛXᴴ/n` with `weights`, or `XXᴴ/n` with independent entries of the
/// given variances) against their asymptotic support, widened by a
/// `3·n^{−1/3}` multiplicative slack on each edge.
pub fn rmt_support_check(
    p: usize,
    n: usize,
    weights: Option<&[f64]>,
    variance_profile: Option<&RMatrix>,
    trials: usize,
    seed: u64,
) -> Result<RmtReport> {
    if p == 0 || p > n {
        bail!(InvalidArgument, "need 1 <= p <= n, got p = {}, n = {}", p, n);
    }
    if trials == 0 {
        bail!(InvalidArgument, "trials must be at least 1");
    }
    if weights.is_some() && variance_profile.is_some() {
        bail!(InvalidArgument, "weights and variance profile are mutually exclusive");
    }
    if let Some(w) = weights {
        if w.len() != n || w.iter().any(|x| !(*x > 0.0)) {
            bail!(InvalidArgument, "weights must be {} positive values", n);
        }
    }
    if let Some(v) = variance_profile {
        if v.rows() != p || v.cols() != n || v.as_slice().iter().any(|x| !(*x >= 0.0)) {
            bail!(InvalidArgument, "variance profile must be a non-negative {}x{} matrix", p, n);
        }
    }
    let nf = n as f64;
    let scale = fmath::sqrt(p as f64 / nf);
    let slack = 3.0 * fmath::powf(nf, -1.0 / 3.0);

    // Centres of the support and the spread constant in front of √(p/n).
    let (centres, gamma): (Vec<f64>, f64) = match (weights, variance_profile) {
        (Some(w), _) => {
            let c = w.iter().sum::<f64>() / nf;
            let m2 = w.iter().map(|x| x * x).sum::<f64>() / nf;
            (alloc::vec![c], 2.0 * fmath::sqrt(m2))
        }
        (_, Some(v)) => {
            let mut rows: Vec<f64> = v.row_sums().iter().map(|s| s / nf).collect();
            rows.sort_by(|a, b| b.total_cmp(a));
            let m2 = (0..p)
                .map(|i| (0..n).map(|j| v[(i, j)] * v[(i, j)]).sum::<f64>() / nf)
                .fold(0.0, f64::max);
            (rows, 2.0 * fmath::sqrt(m2))
        }
        _ => (alloc::vec![1.0], 2.0),
    };
    let lower: Vec<f64> = centres.iter().map(|c| c - gamma * scale).collect();
    let upper: Vec<f64> = centres.iter().map(|c| c + gamma * scale).collect();

    let mut violations = 0;
    let (mut emin, mut emax) = (f64::MAX, f64::MIN);
    let mut fitted: f64 = 0.0;
    for t in 0..trials {
        let mut rng = stream(seed, t as u64);
        let x = CMatrix::from_fn(p, n, |i, j| {
            let var = match variance_profile {
                Some(v) => v[(i, j)],
                None => 1.0,
            };
            complex_gaussian(var, &mut rng)
        });
        let xw = match weights {
            Some(w) => x.scale_columns(w),
            None => x.clone(),
        };
        let gram = (&xw * &x.adjoint()).scale(1.0 / nf);
        let ev = hermitian_eigenvalues(&gram)?;
        emin = emin.min(ev[p - 1]);
        emax = emax.max(ev[0]);
        let mut bad = false;
        for (k, &l) in ev.iter().enumerate() {
            let (lo, hi, c) = if centres.len() == 1 { (lower[0], upper[0], centres[0]) } else { (lower[k], upper[k], centres[k]) };
            let lo_s = if lo > 0.0 { lo * (1.0 - slack) } else { lo - slack * c };
            if l < lo_s || l > hi * (1.0 + slack) {
                bad = true;
            }
            fitted = fitted.max((l - c).abs() / scale);
        }
        // Only the extremes matter for a single interval.
        if centres.len() == 1 {
            let (lo, hi) = (lower[0], upper[0]);
            let lo_s = if lo > 0.0 { lo * (1.0 - slack) } else { lo - slack * centres[0] };
            bad = ev[p - 1] < lo_s || ev[0] > hi * (1.0 + slack);
        }
        if bad {
            violations += 1;
        }
    }
    Ok(RmtReport {
        trials,
        violations,
        fraction: violations as f64 / trials as f64,
        empirical_min: emin,
        empirical_max: emax,
        lower,
        upper,
        gamma,
        fitted_gamma: fitted,
    })
}

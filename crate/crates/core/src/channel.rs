//! Spatial correlation models, channel sampling, covariances and the
//! matching metrics.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::error::{bail, Result};
use crate::fmath;
use crate::matcore::{CMatrix, RMatrix};
use crate::rng;

const POWER_TOL: f64 = 1e-9;

/// Kronecker model: `σ²_ij = Λ_r(i) Λ_t(j) / ρ_c`.
#[derive(Debug, Clone, PartialEq)]
pub struct SeparableModel {
    pub u_t: CMatrix,
    pub u_r: CMatrix,
    pub lambda_t: Vec<f64>,
    pub lambda_r: Vec<f64>,
}

/// Beamspace model with an arbitrary variance profile (`N_r × N_t`).
#[derive(Debug, Clone, PartialEq)]
pub struct CanonicalModel {
    pub u_t: CMatrix,
    pub u_r: CMatrix,
    pub variance_profile: RMatrix,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ChannelModel {
    Separable(SeparableModel),
    Canonical(CanonicalModel),
}

/// One draw `H = U_r H_ind U_tᴴ`.
#[derive(Debug, Clone)]
pub struct ChannelRealization {
    pub h: CMatrix,
    pub h_ind: CMatrix,
}

#[derive(Debug, Clone)]
pub struct ChannelStats {
    pub rho_c: f64,
    pub gamma_r: f64,
    pub sigma_t: CMatrix,
    pub sigma_r: CMatrix,
    pub gamma_t: Vec<f64>,
}

/// Choice of eigenbases for constructed models.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Bases {
    Identity,
    Random,
}

fn check_unitary(u: &CMatrix, n: usize, name: &str) -> Result<()> {
    if u.rows() != n || u.cols() != n {
        bail!(Dimension, "{} is {}x{}, expected {}x{}", name, u.rows(), u.cols(), n, n);
    }
    if !u.is_finite() {
        bail!(InvalidArgument, "{} has non-finite entries", name);
    }
    let dev = u.orthonormality_error();
    if dev > 1e-10 {
        bail!(InvalidArgument, "{} is not unitary (deviation {:e})", name, dev);
    }
    Ok(())
}

fn check_eigenvalues(v: &[f64], name: &str) -> Result<()> {
    if v.is_empty() {
        bail!(InvalidArgument, "{} is empty", name);
    }
    if v.iter().any(|x| !x.is_finite() || *x < 0.0) {
        bail!(InvalidArgument, "{} must be finite and non-negative", name);
    }
    if v.windows(2).any(|w| w[1] > w[0]) {
        bail!(InvalidArgument, "{} must be non-increasing", name);
    }
    Ok(())
}

fn is_identity(u: &CMatrix) -> bool {
    *u == CMatrix::identity(u.rows())
}

impl SeparableModel {
    pub fn new(u_t: CMatrix, u_r: CMatrix, lambda_t: Vec<f64>, lambda_r: Vec<f64>) -> Result<Self> {
        check_eigenvalues(&lambda_t, "lambda_t")?;
        check_eigenvalues(&lambda_r, "lambda_r")?;
        check_unitary(&u_t, lambda_t.len(), "u_t")?;
        check_unitary(&u_r, lambda_r.len(), "u_r")?;
        let st: f64 = lambda_t.iter().sum();
        let sr: f64 = lambda_r.iter().sum();
        if st <= 0.0 || (st - sr).abs() > POWER_TOL * st.max(sr) {
            bail!(InvalidArgument, "sum(lambda_t) = {} and sum(lambda_r) = {} must agree and be positive", st, sr);
        }
        Ok(Self { u_t, u_r, lambda_t, lambda_r })
    }

    /// Model with identity eigenbases.
    pub fn diagonal(lambda_t: Vec<f64>, lambda_r: Vec<f64>) -> Result<Self> {
        let (nt, nr) = (lambda_t.len(), lambda_r.len());
        Self::new(CMatrix::identity(nt), CMatrix::identity(nr), lambda_t, lambda_r)
    }

    pub fn rho_c(&self) -> f64 {
        self.lambda_t.iter().sum()
    }

    pub fn variance_profile(&self) -> RMatrix {
        let rc = self.rho_c();
        RMatrix::from_fn(self.lambda_r.len(), self.lambda_t.len(), |i, j| self.lambda_r[i] * self.lambda_t[j] / rc)
    }

    /// The same statistics expressed as a canonical model.
    pub fn to_canonical(&self) -> CanonicalModel {
        CanonicalModel { u_t: self.u_t.clone(), u_r: self.u_r.clone(), variance_profile: self.variance_profile() }
    }
}

impl CanonicalModel {
    pub fn new(u_t: CMatrix, u_r: CMatrix, variance_profile: RMatrix) -> Result<Self> {
        let (nr, nt) = (variance_profile.rows(), variance_profile.cols());
        if nr == 0 || nt == 0 {
            bail!(InvalidArgument, "variance profile is empty");
        }
        if variance_profile.as_slice().iter().any(|x| !x.is_finite() || *x < 0.0) {
            bail!(InvalidArgument, "variance profile must be finite and non-negative");
        }
        let cols = variance_profile.col_sums();
        let tol = 1e-12 * variance_profile.sum().max(1.0);
        if cols.windows(2).any(|w| w[1] > w[0] + tol) {
            bail!(InvalidArgument, "variance profile column sums must be non-increasing");
        }
        if variance_profile.sum() <= 0.0 {
            bail!(InvalidArgument, "variance profile has zero total power");
        }
        check_unitary(&u_t, nt, "u_t")?;
        check_unitary(&u_r, nr, "u_r")?;
        Ok(Self { u_t, u_r, variance_profile })
    }

    pub fn diagonal(variance_profile: RMatrix) -> Result<Self> {
        let (nr, nt) = (variance_profile.rows(), variance_profile.cols());
        Self::new(CMatrix::identity(nt), CMatrix::identity(nr), variance_profile)
    }
}

impl From<SeparableModel> for ChannelModel {
    fn from(m: SeparableModel) -> Self {
        ChannelModel::Separable(m)
    }
}

impl From<CanonicalModel> for ChannelModel {
    fn from(m: CanonicalModel) -> Self {
        ChannelModel::Canonical(m)
    }
}

impl ChannelModel {
    pub fn n_t(&self) -> usize {
        self.u_t().rows()
    }

    pub fn n_r(&self) -> usize {
        self.u_r().rows()
    }

    pub fn u_t(&self) -> &CMatrix {
        match self {
            ChannelModel::Separable(m) => &m.u_t,
            ChannelModel::Canonical(m) => &m.u_t,
        }
    }

    pub fn u_r(&self) -> &CMatrix {
        match self {
            ChannelModel::Separable(m) => &m.u_r,
            ChannelModel::Canonical(m) => &m.u_r,
        }
    }

    pub fn is_separable(&self) -> bool {
        matches!(self, ChannelModel::Separable(_))
    }

    pub fn variance_profile(&self) -> RMatrix {
        match self {
            ChannelModel::Separable(m) => m.variance_profile(),
            ChannelModel::Canonical(m) => m.variance_profile.clone(),
        }
    }

    /// Transmit eigenvalues (column powers `γ_{t,k}` for the canonical model).
    pub fn lambda_t(&self) -> Vec<f64> {
        match self {
            ChannelModel::Separable(m) => m.lambda_t.clone(),
            ChannelModel::Canonical(m) => m.variance_profile.col_sums(),
        }
    }

    /// Receive eigenvalues (row powers for the canonical model, in row order).
    pub fn lambda_r(&self) -> Vec<f64> {
        match self {
            ChannelModel::Separable(m) => m.lambda_r.clone(),
            ChannelModel::Canonical(m) => m.variance_profile.row_sums(),
        }
    }

    pub fn rho_c(&self) -> f64 {
        match self {
            ChannelModel::Separable(m) => m.rho_c(),
            ChannelModel::Canonical(m) => m.variance_profile.sum(),
        }
    }

    pub fn gamma_r(&self) -> f64 {
        self.rho_c() / self.n_r() as f64
    }

    /// Draws `H_ind` entry by entry in row-major order, then rotates.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> ChannelRealization {
        let profile = self.variance_profile();
        let h_ind = CMatrix::from_fn(profile.rows(), profile.cols(), |i, j| rng::complex_gaussian(profile[(i, j)], rng));
        let (u_t, u_r) = (self.u_t(), self.u_r());
        let h = match (is_identity(u_r), is_identity(u_t)) {
            (true, true) => h_ind.clone(),
            _ => &(u_r * &h_ind) * &u_t.adjoint(),
        };
        ChannelRealization { h, h_ind }
    }

    /// `Σ_t = U_t Λ_t U_tᴴ`.
    pub fn transmit_covariance(&self) -> CMatrix {
        let u = self.u_t();
        &u.scale_columns(&self.lambda_t()) * &u.adjoint()
    }

    /// `Σ_r = U_r Λ_r U_rᴴ`.
    pub fn receive_covariance(&self) -> CMatrix {
        let u = self.u_r();
        &u.scale_columns(&self.lambda_r()) * &u.adjoint()
    }

    pub fn stats(&self) -> ChannelStats {
        ChannelStats {
            rho_c: self.rho_c(),
            gamma_r: self.gamma_r(),
            sigma_t: self.transmit_covariance(),
            sigma_r: self.receive_covariance(),
            gamma_t: self.lambda_t(),
        }
    }

    /// Number of strictly positive transmit eigenvalues.
    pub fn transmit_rank(&self) -> usize {
        let lt = self.lambda_t();
        let top = lt.iter().cloned().fold(0.0, f64::max);
        lt.iter().filter(|&&x| x > 1e-12 * top).count()
    }

    /// `Π_{i≤m} Λ_t(i)`.
    pub fn matching_metric_tx(&self, m: usize) -> Result<f64> {
        matching_metric_tx(&self.lambda_t(), m)
    }

    /// `Σ_i Λ_r(i)²`.
    pub fn matching_metric_rx(&self) -> f64 {
        matching_metric_rx(&self.lambda_r())
    }
}

pub fn matching_metric_tx(lambda_t: &[f64], m: usize) -> Result<f64> {
    if m == 0 || m > lambda_t.len() {
        bail!(InvalidArgument, "stream count {} outside 1..={}", m, lambda_t.len());
    }
    Ok(lambda_t[..m].iter().product())
}

pub fn matching_metric_rx(lambda_r: &[f64]) -> f64 {
    lambda_r.iter().map(|x| x * x).sum()
}

fn bases<R: Rng + ?Sized>(n_t: usize, n_r: usize, b: Bases, rng: &mut R) -> (CMatrix, CMatrix) {
    match b {
        Bases::Identity => (CMatrix::identity(n_t), CMatrix::identity(n_r)),
        Bases::Random => {
            let ut = rng::random_unitary(n_t, rng);
            let ur = rng::random_unitary(n_r, rng);
            (ut, ur)
        }
    }
}

/// `Λ_t = [ρ_c/m ×m, 0, …]`, `Λ_r = (ρ_c/n_r)·1`.
pub fn make_matched<R: Rng + ?Sized>(
    n_t: usize,
    n_r: usize,
    m: usize,
    rho_c: f64,
    b: Bases,
    rng: &mut R,
) -> Result<SeparableModel> {
    if m == 0 || m > n_t || n_r == 0 || !(rho_c > 0.0) {
        bail!(InvalidArgument, "matched model needs 1 <= m <= n_t, n_r >= 1, rho_c > 0");
    }
    let mut lt = vec![0.0; n_t];
    lt[..m].iter_mut().for_each(|x| *x = rho_c / m as f64);
    let lr = vec![rho_c / n_r as f64; n_r];
    let (ut, ur) = bases(n_t, n_r, b, rng);
    SeparableModel::new(ut, ur, lt, lr)
}

/// Eigenvalue profile for a mismatched channel.
#[derive(Debug, Clone, PartialEq)]
pub enum MismatchProfile {
    /// Geometric decay with `Λ(1)/Λ(n) = ratio` on both sides.
    Geometric { ratio: f64 },
    /// Flat transmit and receive eigenvalues (the i.i.d. channel).
    Uniform,
    Explicit { lambda_t: Vec<f64>, lambda_r: Vec<f64> },
}

impl Default for MismatchProfile {
    fn default() -> Self {
        MismatchProfile::Geometric { ratio: 1e3 }
    }
}

/// Geometric vector of length `n` summing to `total` with first/last = `ratio`.
pub fn geometric_profile(n: usize, total: f64, ratio: f64) -> Vec<f64> {
    if n == 1 {
        return vec![total];
    }
    let r = fmath::powf(ratio, -1.0 / (n - 1) as f64);
    let raw: Vec<f64> = (0..n).map(|k| fmath::powf(r, k as f64)).collect();
    let s: f64 = raw.iter().sum();
    raw.into_iter().map(|x| total * x / s).collect()
}

pub fn make_mismatched<R: Rng + ?Sized>(
    n_t: usize,
    n_r: usize,
    m: usize,
    rho_c: f64,
    profile: &MismatchProfile,
    b: Bases,
    rng: &mut R,
) -> Result<SeparableModel> {
    if m == 0 || m > n_t || n_r == 0 || !(rho_c > 0.0) {
        bail!(InvalidArgument, "mismatched model needs 1 <= m <= n_t, n_r >= 1, rho_c > 0");
    }
    let (lt, lr) = match profile {
        MismatchProfile::Geometric { ratio } => {
            if !(*ratio >= 1.0) {
                bail!(InvalidArgument, "geometric ratio must be >= 1");
            }
            (geometric_profile(n_t, rho_c, *ratio), geometric_profile(n_r, rho_c, *ratio))
        }
        MismatchProfile::Uniform => (vec![rho_c / n_t as f64; n_t], vec![rho_c / n_r as f64; n_r]),
        MismatchProfile::Explicit { lambda_t, lambda_r } => {
            if lambda_t.len() != n_t || lambda_r.len() != n_r {
                bail!(Dimension, "explicit profile lengths do not match n_t = {}, n_r = {}", n_t, n_r);
            }
            (lambda_t.clone(), lambda_r.clone())
        }
    };
    let top = lt.first().copied().unwrap_or(0.0);
    let rank = lt.iter().filter(|&&x| x > 1e-12 * top).count();
    if rank < m {
        return Err(crate::Error::RankDeficient { needed: m, found: rank });
    }
    let (ut, ur) = bases(n_t, n_r, b, rng);
    SeparableModel::new(ut, ur, lt, lr)
}

/// Family of transmit eigenvalue vectors whose matching metric covers
/// `[1e-3, 1]·(ρ_c/m)^m` roughly uniformly in log scale. Random simplex
/// points (Dirichlet with a random concentration, so both flat and sparse
/// points occur) are sorted, rank-deficient ones rejected, and the first
/// point landing in each of `count` log-spaced bins is kept. Bins still
/// empty after the draw budget are left out. Sorted by metric.
pub fn matching_sweep_family<R: Rng + ?Sized>(
    n_t: usize,
    m: usize,
    rho_c: f64,
    count: usize,
    rng: &mut R,
) -> Result<Vec<Vec<f64>>> {
    if count == 0 || m == 0 || m > n_t || !(rho_c > 0.0) {
        bail!(InvalidArgument, "sweep needs count >= 1, 1 <= m <= n_t, rho_c > 0");
    }
    let log_max = m as f64 * fmath::ln(rho_c / m as f64);
    let log_min = log_max + fmath::ln(1e-3);
    let width = (log_max - log_min) / count as f64;
    let mut bins: Vec<Option<(f64, Vec<f64>)>> = vec![None; count];
    let mut filled = 0;
    let budget = 5000 * count.max(200);
    for _ in 0..budget {
        if filled == count {
            break;
        }
        let conc = fmath::exp(fmath::ln(0.03) * rng::uniform(rng));
        let gamma = rand_distr::Gamma::new(conc, 1.0).map_err(|_| crate::Error::InvalidArgument("gamma shape".into()))?;
        let mut x: Vec<f64> = (0..n_t).map(|_| rng.sample(gamma)).collect();
        let s: f64 = x.iter().sum();
        if !(s > 0.0) {
            continue;
        }
        x.iter_mut().for_each(|v| *v *= rho_c / s);
        x.sort_by(|a, b| b.total_cmp(a));
        if !(x[m - 1] > 1e-12 * x[0]) {
            continue;
        }
        let lm: f64 = x[..m].iter().map(|v| fmath::ln(*v)).sum();
        if lm < log_min || lm > log_max {
            continue;
        }
        let k = (((lm - log_min) / width) as usize).min(count - 1);
        if bins[k].is_none() {
            bins[k] = Some((lm, x));
            filled += 1;
        }
    }
    Ok(bins.into_iter().flatten().map(|(_, x)| x).collect())
}

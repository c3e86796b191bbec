//! Closed-form and Monte Carlo evaluators for the analytic loss bounds.
//! Logarithms are natural and mutual information is in nats throughout.

use alloc::vec;
use alloc::vec::Vec;

use crate::channel::ChannelModel;
use crate::error::{bail, Error, Result};
use crate::fmath;
use crate::link;
use crate::matcore::{hermitian_eigenvalues, CMatrix};
use crate::precoding;
use crate::rng::{complex_gaussian_matrix, stream};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapStats {
    pub gap_t: f64,
    pub mu_r2: f64,
    pub gap_t_c: f64,
    pub mu_r2_c: f64,
    pub g_m_lambda_t: f64,
    pub g_m_lambda_r: f64,
    pub b1: f64,
    pub b2: f64,
}

fn sorted_desc(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(|a, b| b.total_cmp(a));
    v
}

fn geometric_mean(v: &[f64]) -> f64 {
    if v.iter().any(|&x| x <= 0.0) {
        return 0.0;
    }
    fmath::exp(v.iter().map(|&x| fmath::ln(x)).sum::<f64>() / v.len() as f64)
}

pub fn gap_statistics(model: &ChannelModel, m: usize) -> Result<GapStats> {
    let (nt, nr) = (model.n_t(), model.n_r());
    if m == 0 || m > nt || m > nr {
        bail!(InvalidArgument, "stream count {} outside 1..={}", m, nt.min(nr));
    }
    let lt = model.lambda_t();
    let lr = sorted_desc(model.lambda_r());
    let rho_c = model.rho_c();
    let profile = model.variance_profile();
    let gap_t = if nt > 1 { 1.0 - lt[1] / lt[0] } else { 1.0 };
    let mu_r2 = lr.iter().map(|x| x * x).sum::<f64>() / nr as f64;
    let gap_t_c = if nt > 1 {
        let s: f64 = (1..nt)
            .map(|k| {
                let d = lt[0] - lt[k];
                if d == 0.0 {
                    f64::INFINITY
                } else {
                    (nr * nr) as f64 / (d * d)
                }
            })
            .sum();
        s / (nt - 1) as f64
    } else {
        0.0
    };
    let mu_r2_c = (1..nt)
        .map(|j| (0..nr).map(|i| profile[(i, j)] * profile[(i, 0)]).sum::<f64>() / nr as f64)
        .fold(0.0, f64::max);
    Ok(GapStats {
        gap_t,
        mu_r2,
        gap_t_c,
        mu_r2_c,
        g_m_lambda_t: geometric_mean(&lt[..m]),
        g_m_lambda_r: geometric_mean(&lr[..m]),
        b1: lt[..m].iter().sum::<f64>() / rho_c,
        b2: lr[..m].iter().sum::<f64>() / rho_c,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundId {
    Prop5,
    Thm1,
    Thm2,
    Prop6,
    Thm3,
    Prop7,
    Thm4,
    Thm4Dominant,
    Thm5,
    Lemma3,
    Lemma4,
    Prop8,
    Prop8Dominant,
}

impl BoundId {
    pub const ALL: [BoundId; 13] = [
        BoundId::Prop5,
        BoundId::Thm1,
        BoundId::Thm2,
        BoundId::Prop6,
        BoundId::Thm3,
        BoundId::Prop7,
        BoundId::Thm4,
        BoundId::Thm4Dominant,
        BoundId::Thm5,
        BoundId::Lemma3,
        BoundId::Lemma4,
        BoundId::Prop8,
        BoundId::Prop8Dominant,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            BoundId::Prop5 => "prop5",
            BoundId::Thm1 => "thm1",
            BoundId::Thm2 => "thm2",
            BoundId::Prop6 => "prop6",
            BoundId::Thm3 => "thm3",
            BoundId::Prop7 => "prop7",
            BoundId::Thm4 => "thm4",
            BoundId::Thm4Dominant => "thm4_dominant",
            BoundId::Thm5 => "thm5",
            BoundId::Lemma3 => "lemma3",
            BoundId::Lemma4 => "lemma4",
            BoundId::Prop8 => "prop8",
            BoundId::Prop8Dominant => "prop8_dominant",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::ALL
            .iter()
            .copied()
            .find(|b| b.as_str() == s)
            .ok_or_else(|| Error::Unknown(alloc::format!("bound id '{}'", s)))
    }
}

/// Inputs shared by the bound evaluators. `kappa` stands in for whichever
/// unspecified constant the bound carries.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundParams {
    pub alpha: f64,
    pub beta: f64,
    pub kappa: f64,
    pub trials: usize,
    pub seed: u64,
}

impl Default for BoundParams {
    fn default() -> Self {
        Self { alpha: 2.0, beta: 1.0, kappa: 1.0, trials: 1000, seed: 0 }
    }
}

struct Ctx<'a> {
    model: &'a ChannelModel,
    m: usize,
    rho: f64,
    p: BoundParams,
}

impl Ctx<'_> {
    fn alpha(&self) -> Result<f64> {
        if !(self.p.alpha > 1.0) {
            bail!(InvalidArgument, "alpha must exceed 1, got {}", self.p.alpha);
        }
        Ok(self.p.alpha)
    }

    fn separable(&self, id: BoundId) -> Result<()> {
        if !self.model.is_separable() {
            bail!(Precondition, "{} applies to separable models only", id.as_str());
        }
        Ok(())
    }

    fn trials(&self) -> Result<usize> {
        if self.p.trials == 0 {
            bail!(InvalidArgument, "trials must be at least 1");
        }
        Ok(self.p.trials)
    }

    fn lt(&self) -> Vec<f64> {
        self.model.lambda_t()
    }

    /// Requires `ρ ≥ α·M/Λ_t(M)`.
    fn high_snr(&self, id: BoundId) -> Result<f64> {
        let a = self.alpha()?;
        let need = a * self.m as f64 / self.lt()[self.m - 1];
        if !(self.rho >= need) {
            bail!(SnrCondition, "{} needs rho >= {:.6} (alpha M / lambda_t(M)), got {}", id.as_str(), need, self.rho);
        }
        Ok(a)
    }

    fn channels(&self) -> Result<Vec<CMatrix>> {
        let n = self.trials()?;
        Ok((0..n).map(|t| self.model.sample(&mut stream(self.p.seed, t as u64)).h).collect())
    }

    fn gram_eigs(h: &CMatrix) -> Result<Vec<f64>> {
        hermitian_eigenvalues(&h.adjoint_mul(h)?)
    }

    // Samples of 1/Λ_H(M).
    fn inverse_mth_eigs(&self, hs: &[CMatrix]) -> Result<Vec<f64>> {
        hs.iter()
            .map(|h| {
                let ev = Self::gram_eigs(h)?;
                let l = ev.get(self.m - 1).copied().unwrap_or(0.0);
                if !(l > 0.0) {
                    bail!(DegenerateDenominator, "channel draw has fewer than {} non-zero modes", self.m);
                }
                Ok(1.0 / l)
            })
            .collect()
    }

    fn mean_stat_info(&self, hs: &[CMatrix], m: usize) -> Result<f64> {
        let f = precoding::stat_semiunitary(self.model, m, self.rho)?.effective();
        let mut s = 0.0;
        for h in hs {
            s += link::mutual_info_nats(h, &f)?;
        }
        let e = s / hs.len() as f64;
        if !(e > 0.0) {
            bail!(DegenerateDenominator, "expected statistical mutual information is {:e}", e);
        }
        Ok(e)
    }

    fn receive_scaling(&self) -> f64 {
        let (m, nt, nr) = (self.m as f64, self.model.n_t() as f64, self.model.n_r() as f64);
        self.p.kappa * (fmath::sqrt(m) + fmath::sqrt(nt)) / fmath::sqrt(nr)
    }

    fn perturbation_scaling(&self) -> f64 {
        let (nt, nr) = (self.model.n_t() as f64, self.model.n_r() as f64);
        fmath::sqrt(nt * fmath::ln(nr) / nr)
    }
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn positive_leading(lt: &[f64], m: usize) -> Result<()> {
    if lt[..m].iter().any(|&x| !(x > 0.0)) {
        bail!(DegenerateDenominator, "leading {} transmit eigenvalues must be positive", m);
    }
    Ok(())
}

/// Right-hand side of the requested bound.
pub fn evaluate_bound(id: BoundId, model: &ChannelModel, m: usize, rho: f64, params: &BoundParams) -> Result<f64> {
    if m == 0 || m > model.n_t() {
        bail!(InvalidArgument, "stream count {} outside 1..={}", m, model.n_t());
    }
    if !(rho > 0.0) || !rho.is_finite() {
        bail!(InvalidArgument, "rho must be positive and finite, got {}", rho);
    }
    let c = Ctx { model, m, rho, p: *params };
    let mf = m as f64;
    let (nt, nr) = (model.n_t() as f64, model.n_r() as f64);
    let gamma_r = model.gamma_r();
    let lt = c.lt();
    let kappa = params.kappa;
    let beta2 = params.beta * params.beta;
    if !(params.beta > 0.0) {
        bail!(InvalidArgument, "beta must be positive");
    }
    match id {
        BoundId::Prop5 => {
            let a = c.alpha()?;
            let hs = c.channels()?;
            let x = c.inverse_mth_eigs(&hs)?;
            let need = a * mf * mean(&x);
            if !(rho >= need) {
                bail!(SnrCondition, "prop5 needs rho >= {:.6} (alpha E[M / lambda_H(M)]), got {}", need, rho);
            }
            let sq: Vec<f64> = x.iter().map(|v| v * v).collect();
            let ratio = mean(&sq) / (mean(&x) * mean(&x));
            Ok(2.0 * mf / (a * a * c.mean_stat_info(&hs, m)?) * ratio)
        }
        BoundId::Thm1 => {
            c.separable(id)?;
            positive_leading(&lt, m)?;
            let lr = model.lambda_r();
            let root = fmath::sqrt(lr.iter().map(|x| x * x).sum::<f64>()) / nr;
            let s: f64 = lt[..m].iter().map(|&l| 1.0 / fmath::ln_1p(rho / mf * l)).sum();
            Ok(2.0 * kappa / gamma_r * root * s / mf)
        }
        BoundId::Thm2 => {
            positive_leading(&lt, m)?;
            let s: f64 = lt[..m].iter().map(|&g| 1.0 / (g * fmath::ln_1p(rho / mf * g))).sum();
            Ok(2.0 * kappa * fmath::sqrt(nt / nr) * nr / mf * s)
        }
        BoundId::Prop6 => {
            let hs = c.channels()?;
            let e = c.mean_stat_info(&hs, 1)?;
            Ok(fmath::ln_1p(rho * kappa * c.perturbation_scaling()) / e)
        }
        BoundId::Thm3 => {
            c.separable(id)?;
            if m > model.n_r() {
                bail!(InvalidArgument, "thm3 needs m <= n_r");
            }
            c.high_snr(id)?;
            let g = gap_statistics(model, m)?;
            let lr = sorted_desc(model.lambda_r());
            let rho_c = model.rho_c();
            let sigma_r = CMatrix::from_real_diag(&lr);
            let sigma_t = CMatrix::from_real_diag(&lt);
            let n = c.trials()?;
            let (mut er, mut et) = (0.0, 0.0);
            for t in 0..n {
                let x = complex_gaussian_matrix(model.n_r(), model.n_t(), 1.0, &mut stream(params.seed, t as u64));
                let a = x.adjoint_mul(&(&sigma_r * &x))?;
                let b = &(&x * &sigma_t) * &x.adjoint();
                er += fmath::ln(hermitian_eigenvalues(&a)?[0] / g.g_m_lambda_r);
                et += fmath::ln(hermitian_eigenvalues(&b)?[0] / g.g_m_lambda_t);
            }
            let k4 = kappa + (er / n as f64).min(et / n as f64);
            let den = fmath::ln(rho / core::f64::consts::E)
                + (0..m).map(|k| fmath::ln(lt[k] * lr[k] / rho_c)).sum::<f64>() / mf;
            if !(den > 0.0) {
                bail!(DegenerateDenominator, "thm3 denominator is {:e}", den);
            }
            Ok((fmath::ln(core::f64::consts::E / mf) + k4) / den)
        }
        BoundId::Prop7 => {
            let hs = c.channels()?;
            let stat = precoding::stat_semiunitary(model, m, rho)?.effective();
            let mut total = 0.0;
            for h in &hs {
                let sp = link::sinr(h, &precoding::perfect_unconstrained(h, m, rho)?.effective())?;
                let ss = link::sinr(h, &stat)?;
                let mut acc = 0.0;
                for k in 0..m {
                    if !(beta2 * sp[k] > 1.0) {
                        bail!(SnrCondition, "prop7 needs beta^2 SINR_perf > 1 on every stream, got {:e}", beta2 * sp[k]);
                    }
                    if !(ss[k] > 0.0) {
                        bail!(DegenerateDenominator, "statistical SINR is zero on stream {}", k);
                    }
                    let d = sp[k] - ss[k];
                    acc += fmath::exp(0.5 * beta2 * d) * fmath::sqrt(1.0 + d / ss[k]) / (1.0 - 1.0 / (beta2 * sp[k]));
                }
                total += acc / mf - 1.0;
            }
            Ok(total / hs.len() as f64)
        }
        BoundId::Thm4 => {
            c.separable(id)?;
            let a = c.high_snr(id)?;
            let hs = c.channels()?;
            let x = c.inverse_mth_eigs(&hs)?;
            let sq: Vec<f64> = x.iter().map(|v| v * v).collect();
            let ratio = mean(&sq) / (mean(&x) * mean(&x));
            let first: f64 = lt[..m].iter().map(|&l| 1.0 / (rho * l / mf - 1.0)).sum::<f64>() / (beta2 * mf);
            let second = beta2 * (1.0 + mf / a);
            let lead = beta2 * rho * lt[..m].iter().sum::<f64>() / mf;
            let third = lead * (1.0 / a + ratio / (a * a) + c.receive_scaling() / gamma_r);
            Ok(first + second + third)
        }
        BoundId::Thm4Dominant => {
            c.high_snr(id)?;
            let inv: f64 = lt[..m].iter().map(|l| 1.0 / l).sum();
            Ok(inv / (beta2 * rho) + beta2 * lt[..m].iter().sum::<f64>() / lt[m - 1])
        }
        BoundId::Thm5 => {
            let a = c.alpha()?;
            positive_leading(&lt, m)?;
            let need = a * mf / lt[m - 1];
            if !(rho >= need) {
                bail!(SnrCondition, "thm5 needs rho >= {:.6} (alpha M / gamma_t(M)), got {}", need, rho);
            }
            let avg = lt[..m].iter().sum::<f64>() / mf;
            let inv: f64 = lt[..m].iter().map(|g| 1.0 / g).sum();
            Ok(beta2 * rho / (2.0 * a) * avg + inv / (beta2 * rho) + beta2 * rho / (2.0 * gamma_r) * avg * c.receive_scaling())
        }
        BoundId::Lemma3 => {
            c.separable(id)?;
            let g = gap_statistics(model, 1)?;
            if !(g.gap_t > 0.0) {
                bail!(DegenerateDenominator, "lemma3 needs a strictly dominant transmit eigenvalue");
            }
            Ok(kappa * fmath::sqrt(g.mu_r2) / (g.gap_t * gamma_r) * c.perturbation_scaling())
        }
        BoundId::Lemma4 => {
            let g = gap_statistics(model, 1)?;
            if !g.gap_t_c.is_finite() {
                bail!(DegenerateDenominator, "lemma4 needs distinct column powers");
            }
            Ok(kappa * fmath::sqrt(g.gap_t_c * g.mu_r2_c) * c.perturbation_scaling())
        }
        BoundId::Prop8 => {
            c.separable(id)?;
            let a = c.high_snr(id)?;
            let hs = c.channels()?;
            let mut ewf = vec![0.0; m];
            for h in &hs {
                let ev = Ctx::gram_eigs(h)?;
                let top = ev[0];
                let pos: Vec<f64> = ev.iter().take(m).copied().filter(|&x| x > 1e-10 * top).collect();
                if pos.is_empty() {
                    continue;
                }
                let wf = precoding::waterfill(&pos, rho)?;
                for (k, p) in wf.lambda_wf.iter().enumerate() {
                    ewf[k] += p;
                }
            }
            ewf.iter_mut().for_each(|x| *x /= hs.len() as f64);
            let tail: f64 = (0..m).map(|k| lt[k] * (ewf[k] - rho / mf) / (1.0 + rho * lt[k] / mf)).sum::<f64>() / mf;
            Ok((1.0 + mf / a) * (mf / a + mf / gamma_r * c.receive_scaling() + tail))
        }
        BoundId::Prop8Dominant => Ok(mf / gamma_r * c.receive_scaling()),
    }
}

//! Monte Carlo estimates of relative performance loss between precoding
//! schemes, plus bound evaluators and eigenvalue-support checks.

use alloc::vec;
use alloc::vec::Vec;

use crate::channel::ChannelModel;
use crate::error::{bail, Error, Result};
use crate::exec::{pairwise_sum, TrialExecutor};
use crate::fmath;
use crate::link::{self, Constellation, LinkMetrics};
use crate::matcore::{det, hermitian_eigenvalues, svd, CMatrix};
use crate::precoding::{self, Objective, Precoder};
use crate::rng::stream;

mod bounds;
mod rmt;

pub use bounds::{evaluate_bound, gap_statistics, BoundId, BoundParams, GapStats};
pub use rmt::{rmt_support_check, RmtReport};

/// Per-realization ratios with a denominator below this are dropped.
pub const RATIO_GUARD: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MCEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub trials: usize,
}

impl MCEstimate {
    pub fn from_samples(x: &[f64]) -> Self {
        let n = x.len();
        if n == 0 {
            return Self { mean: f64::NAN, stderr: f64::NAN, trials: 0 };
        }
        let mean = pairwise_sum(x) / n as f64;
        let stderr = if n > 1 {
            let sq: Vec<f64> = x.iter().map(|v| (v - mean) * (v - mean)).collect();
            fmath::sqrt(pairwise_sum(&sq) / (n - 1) as f64 / n as f64)
        } else {
            0.0
        };
        Self { mean, stderr, trials: n }
    }

    /// `mean(a)/mean(b)` with a delta-method standard error.
    pub fn ratio_of_means(a: &[f64], b: &[f64]) -> Result<Self> {
        let n = a.len();
        if n == 0 || n != b.len() {
            bail!(InvalidArgument, "ratio needs two equal, non-empty sample sets");
        }
        let ma = pairwise_sum(a) / n as f64;
        let mb = pairwise_sum(b) / n as f64;
        if !(mb.abs() > RATIO_GUARD) {
            bail!(DegenerateDenominator, "mean denominator {:e} is too small", mb);
        }
        let r = ma / mb;
        let resid: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - r * y).collect();
        let se = MCEstimate::from_samples(&resid).stderr / mb.abs();
        Ok(Self { mean: r, stderr: se, trials: n })
    }
}

/// Precoder families that can be compared on a shared channel draw.
#[derive(Debug, Clone, PartialEq)]
pub enum Scheme {
    PerfUnconst,
    PerfSemi,
    PerfEqualized,
    PerfFixed { lambda: Vec<f64>, objective: Objective },
    StatSemi,
    StatFixed { alpha: f64 },
    /// Dominant transmit eigenvectors with a caller-supplied loading.
    StatLoaded { lambda: Vec<f64> },
}

impl Scheme {
    pub fn name(&self) -> &'static str {
        match self {
            Scheme::PerfUnconst => "perf_unconst",
            Scheme::PerfSemi => "perf_semi",
            Scheme::PerfEqualized => "perf_equalized",
            Scheme::PerfFixed { .. } => "perf_fixed",
            Scheme::StatSemi => "stat_semi",
            Scheme::StatFixed { .. } => "stat_fixed",
            Scheme::StatLoaded { .. } => "stat_loaded",
        }
    }

    pub fn uses_channel(&self) -> bool {
        !matches!(self, Scheme::StatSemi | Scheme::StatFixed { .. } | Scheme::StatLoaded { .. })
    }

    pub fn build(&self, model: &ChannelModel, h: &CMatrix, m: usize, rho: f64) -> Result<Precoder> {
        match self {
            Scheme::PerfUnconst => precoding::perfect_unconstrained(h, m, rho),
            Scheme::PerfSemi => precoding::perfect_semiunitary(h, m, rho),
            Scheme::PerfEqualized => precoding::perfect_equalized(h, m, rho),
            Scheme::PerfFixed { lambda, objective } => precoding::perfect_fixed(h, m, rho, lambda, *objective),
            Scheme::StatSemi => precoding::stat_semiunitary(model, m, rho),
            Scheme::StatFixed { alpha } => precoding::stat_fixed(model, m, rho, *alpha),
            Scheme::StatLoaded { lambda } => {
                if lambda.len() != m {
                    bail!(Dimension, "loading has {} entries for {} streams", lambda.len(), m);
                }
                Precoder::new(model.u_t().leading_columns(m), lambda.clone(), rho)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeltaSpec {
    pub m: usize,
    pub rho: f64,
    pub benchmark: Scheme,
    pub test: Scheme,
    pub constellation: Constellation,
    pub trials: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeltaReport {
    /// Ratio of means, test scheme in the denominator.
    pub delta_i: MCEstimate,
    /// Benchmark versus the perfect-CSI semiunitary precoder.
    pub delta_i1: MCEstimate,
    /// Perfect-CSI semiunitary precoder versus the test scheme.
    pub delta_i2: MCEstimate,
    /// Mean of per-realization ratios.
    pub delta_i_tilde: MCEstimate,
    pub delta_i_tilde2: MCEstimate,
    /// Per-stream-average error probability, benchmark in the denominator.
    pub delta_p: MCEstimate,
    /// Same with the at-least-one-stream error probability.
    pub delta_p_any: MCEstimate,
    pub delta_mse: MCEstimate,
    /// `SINR_bench,k − SINR_test,k` per stream.
    pub delta_sinr: Vec<MCEstimate>,
    pub i_bench: MCEstimate,
    pub i_test: MCEstimate,
    pub i_perf_semi: MCEstimate,
    pub p_bench: MCEstimate,
    pub p_test: MCEstimate,
    pub discarded_i: usize,
    pub discarded_p: usize,
}

struct Trial {
    i_bench: f64,
    i_test: f64,
    i_semi: f64,
    p_bench: f64,
    p_test: f64,
    p_bench_any: f64,
    p_test_any: f64,
    mse_ratio: f64,
    dsinr: Vec<f64>,
}

fn run_trial(model: &ChannelModel, spec: &DeltaSpec, index: usize) -> Result<Trial> {
    let mut rng = stream(spec.seed, index as u64);
    let h = model.sample(&mut rng).h;
    let c = spec.constellation;
    let eval = |s: &Scheme| -> Result<LinkMetrics> {
        let p = s.build(model, &h, spec.m, spec.rho)?;
        LinkMetrics::evaluate(&h, &p.effective(), c)
    };
    let bench = eval(&spec.benchmark)?;
    let test = eval(&spec.test)?;
    let semi = if spec.benchmark == Scheme::PerfSemi {
        bench.mutual_info
    } else {
        eval(&Scheme::PerfSemi)?.mutual_info
    };
    let m = spec.m as f64;
    let mse_ratio = bench.mse.iter().zip(&test.mse).map(|(b, t)| (t - b) / b).sum::<f64>() / m;
    let dsinr = bench.sinr.iter().zip(&test.sinr).map(|(b, t)| b - t).collect();
    Ok(Trial {
        i_bench: bench.mutual_info,
        i_test: test.mutual_info,
        i_semi: semi,
        p_bench: bench.p_avg,
        p_test: test.p_avg,
        p_bench_any: bench.p_any,
        p_test_any: test.p_any,
        mse_ratio,
        dsinr,
    })
}

fn guarded_ratios(num: impl Iterator<Item = (f64, f64)>, keep: impl Fn(f64) -> bool) -> (Vec<f64>, usize) {
    let mut out = Vec::new();
    let mut dropped = 0;
    for (n, d) in num {
        if keep(d) {
            out.push(n / d);
        } else {
            dropped += 1;
        }
    }
    (out, dropped)
}

/// Relative loss of `test` against `benchmark`, every scheme evaluated on
/// the same channel draws.
pub fn estimate_delta<E: TrialExecutor>(model: &ChannelModel, spec: &DeltaSpec, exec: &E) -> Result<DeltaReport> {
    if spec.trials == 0 {
        bail!(InvalidArgument, "trials must be at least 1");
    }
    let results = exec.map_trials(spec.trials, |t| run_trial(model, spec, t));
    let trials: Vec<Trial> = results.into_iter().collect::<Result<_>>()?;
    let col = |f: &dyn Fn(&Trial) -> f64| -> Vec<f64> { trials.iter().map(f).collect() };
    let ib = col(&|t| t.i_bench);
    let it = col(&|t| t.i_test);
    let is = col(&|t| t.i_semi);
    let diff = |a: &[f64], b: &[f64]| -> Vec<f64> { a.iter().zip(b).map(|(x, y)| x - y).collect() };
    let i_test = MCEstimate::from_samples(&it);
    if !(i_test.mean > RATIO_GUARD) {
        bail!(DegenerateDenominator, "expected mutual information of the test scheme is {:e}", i_test.mean);
    }
    let delta_i = MCEstimate::ratio_of_means(&diff(&ib, &it), &it)?;
    let delta_i1 = MCEstimate::ratio_of_means(&diff(&ib, &is), &it)?;
    let delta_i2 = MCEstimate::ratio_of_means(&diff(&is, &it), &it)?;

    let keep_i = |d: f64| d >= RATIO_GUARD;
    let (rt, discarded_i) = guarded_ratios(trials.iter().map(|t| (t.i_bench - t.i_test, t.i_test)), keep_i);
    let (rt2, _) = guarded_ratios(trials.iter().map(|t| (t.i_semi - t.i_test, t.i_test)), keep_i);
    // Error probabilities can be legitimately tiny; only unusable values are dropped.
    let keep_p = |d: f64| d.is_normal();
    let (rp, discarded_p) = guarded_ratios(trials.iter().map(|t| (t.p_test - t.p_bench, t.p_bench)), keep_p);
    let (rpa, _) = guarded_ratios(trials.iter().map(|t| (t.p_test_any - t.p_bench_any, t.p_bench_any)), keep_p);

    let delta_sinr = (0..spec.m).map(|k| MCEstimate::from_samples(&col(&|t| t.dsinr[k]))).collect();
    Ok(DeltaReport {
        delta_i,
        delta_i1,
        delta_i2,
        delta_i_tilde: MCEstimate::from_samples(&rt),
        delta_i_tilde2: MCEstimate::from_samples(&rt2),
        delta_p: MCEstimate::from_samples(&rp),
        delta_p_any: MCEstimate::from_samples(&rpa),
        delta_mse: MCEstimate::from_samples(&col(&|t| t.mse_ratio)),
        delta_sinr,
        i_bench: MCEstimate::from_samples(&ib),
        i_test,
        i_perf_semi: MCEstimate::from_samples(&is),
        p_bench: MCEstimate::from_samples(&col(&|t| t.p_bench)),
        p_test: MCEstimate::from_samples(&col(&|t| t.p_test)),
        discarded_i,
        discarded_p,
    })
}

/// Absolute per-scheme averages over seeded channel draws.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchemeReport {
    /// Bits per channel use.
    pub mutual_info: MCEstimate,
    pub p_avg: MCEstimate,
    pub p_any: MCEstimate,
    /// Stream-averaged MSE.
    pub mse: MCEstimate,
}

/// Averages of one scheme's link metrics. Trial `t` draws its channel from
/// `stream(seed, t)`, so schemes evaluated with the same seed see the same
/// channels.
#[allow(clippy::too_many_arguments)]
pub fn estimate_scheme<E: TrialExecutor>(
    model: &ChannelModel,
    scheme: &Scheme,
    m: usize,
    rho: f64,
    c: Constellation,
    trials: usize,
    seed: u64,
    exec: &E,
) -> Result<SchemeReport> {
    if trials == 0 {
        bail!(InvalidArgument, "trials must be at least 1");
    }
    let results = exec.map_trials(trials, |t| -> Result<LinkMetrics> {
        let mut rng = stream(seed, t as u64);
        let h = model.sample(&mut rng).h;
        let p = scheme.build(model, &h, m, rho)?;
        LinkMetrics::evaluate(&h, &p.effective(), c)
    });
    let all: Vec<LinkMetrics> = results.into_iter().collect::<Result<_>>()?;
    let col = |f: &dyn Fn(&LinkMetrics) -> f64| -> MCEstimate { MCEstimate::from_samples(&all.iter().map(f).collect::<Vec<_>>()) };
    Ok(SchemeReport {
        mutual_info: col(&|l| l.mutual_info),
        p_avg: col(&|l| l.p_avg),
        p_any: col(&|l| l.p_any),
        mse: col(&|l| l.mse.iter().sum::<f64>() / l.mse.len() as f64),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamformingReport {
    pub delta_i_bf: MCEstimate,
    pub delta_p_bf: MCEstimate,
    pub i_perf: MCEstimate,
    pub i_stat: MCEstimate,
}

/// Single-stream loss of statistical against perfect-CSI beamforming.
pub fn estimate_delta_beamforming<E: TrialExecutor>(
    model: &ChannelModel,
    rho: f64,
    c: Constellation,
    trials: usize,
    seed: u64,
    exec: &E,
) -> Result<BeamformingReport> {
    if trials == 0 {
        bail!(InvalidArgument, "trials must be at least 1");
    }
    if !(rho > 0.0) {
        bail!(InvalidArgument, "rho must be positive");
    }
    let u = model.u_t().column(0);
    let draws = exec.map_trials(trials, |t| -> Result<(f64, f64)> {
        let h = model.sample(&mut stream(seed, t as u64)).h;
        let top = svd(&h)?.singular_values[0];
        let hu = h.mat_vec(&u);
        let q: f64 = hu.iter().map(|z| z.norm_sqr()).sum();
        Ok((rho * top * top, rho * q))
    });
    let draws: Vec<(f64, f64)> = draws.into_iter().collect::<Result<_>>()?;
    let ip: Vec<f64> = draws.iter().map(|d| fmath::log2(1.0 + d.0)).collect();
    let is: Vec<f64> = draws.iter().map(|d| fmath::log2(1.0 + d.1)).collect();
    let num: Vec<f64> = ip.iter().zip(&is).map(|(a, b)| a - b).collect();
    let (rp, _) = guarded_ratios(
        draws.iter().map(|d| {
            let pp = link::stream_error_prob(&[d.0], c)[0];
            let ps = link::stream_error_prob(&[d.1], c)[0];
            (ps - pp, pp)
        }),
        |d| d.is_normal(),
    );
    Ok(BeamformingReport {
        delta_i_bf: MCEstimate::ratio_of_means(&num, &is)?,
        delta_p_bf: MCEstimate::from_samples(&rp),
        i_perf: MCEstimate::from_samples(&ip),
        i_stat: MCEstimate::from_samples(&is),
    })
}

/// Relative gap between the directly computed SINR difference of stream `k`
/// and its closed form through the determinant and the principal minor of
/// the statistical stream Gram matrix.
pub fn delta_sinr_discrepancy(h: &CMatrix, model: &ChannelModel, m: usize, rho: f64, k: usize) -> Result<f64> {
    if !model.is_separable() {
        bail!(Precondition, "the determinant form needs a separable model");
    }
    if k >= m {
        bail!(InvalidArgument, "stream index {} out of range for {} streams", k, m);
    }
    let perf = precoding::perfect_unconstrained(h, m, rho)?;
    let stat = precoding::stat_semiunitary(model, m, rho)?;
    let direct = link::sinr(h, &perf.effective())?[k] - link::sinr(h, &stat.effective())?[k];

    let h_ind = &(&model.u_r().adjoint() * h) * model.u_t();
    let gram_full = h_ind.adjoint_mul(&h_ind)?;
    let ev = hermitian_eigenvalues(&gram_full)?;
    let wf = precoding::waterfill(&ev[..m], rho)?;
    let sinr_perf = wf.lambda_wf[k] * ev[k];

    let cols: Vec<usize> = (0..m).collect();
    let g = &CMatrix::identity(m) + &gram_full.submatrix(&cols, &cols).scale(rho / m as f64);
    let rest: Vec<usize> = (0..m).filter(|&i| i != k).collect();
    let minor = if rest.is_empty() { 1.0 } else { det(&g.submatrix(&rest, &rest))?.re };
    let sinr_stat = det(&g)?.re / minor - 1.0;
    let closed = sinr_perf - sinr_stat;
    let scale = 1f64.max(sinr_perf.abs()).max(sinr_stat.abs());
    Ok((direct - closed).abs() / scale)
}

pub fn delta_sinr_identity_check(h: &CMatrix, model: &ChannelModel, m: usize, rho: f64, k: usize) -> Result<bool> {
    Ok(delta_sinr_discrepancy(h, model, m, rho, k)? < 1e-8)
}

/// Spearman rank correlation with average ranks for ties.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() || x.len() < 2 {
        bail!(InvalidArgument, "spearman needs two equal samples of length >= 2");
    }
    let rx = ranks(x);
    let ry = ranks(y);
    let n = x.len() as f64;
    let mx = rx.iter().sum::<f64>() / n;
    let my = ry.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in rx.iter().zip(&ry) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::DegenerateDenominator("constant sample".into()));
    }
    Ok(sxy / fmath::sqrt(sxx * syy))
}

fn ranks(v: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    let mut r = vec![0.0; v.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
            j += 1;
        }
        let avg = 0.5 * (i + j) as f64 + 1.0;
        for &p in &idx[i..=j] {
            r[p] = avg;
        }
        i = j + 1;
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{make_matched, Bases, SeparableModel};
    use crate::exec::Sequential;
    use crate::rng::{random_unitary, uniform};

    fn spec(bench: Scheme, test: Scheme, m: usize, rho: f64, trials: usize) -> DeltaSpec {
        DeltaSpec { m, rho, benchmark: bench, test, constellation: Constellation::qpsk(), trials, seed: 7 }
    }

    #[test]
    fn scheme_report_shares_draws() {
        let model: ChannelModel = SeparableModel::diagonal(vec![6.0, 3.0, 2.0, 1.0], vec![3.0; 4]).unwrap().into();
        let q = Constellation::qpsk();
        let semi = estimate_scheme(&model, &Scheme::StatSemi, 2, 5.0, q, 300, 4, &Sequential).unwrap();
        let loaded = estimate_scheme(&model, &Scheme::StatLoaded { lambda: vec![1.0, 1.0] }, 2, 5.0, q, 300, 4, &Sequential).unwrap();
        assert_eq!(semi, loaded);
        let d = estimate_delta(&model, &spec(Scheme::PerfUnconst, Scheme::StatSemi, 2, 5.0, 300), &Sequential).unwrap();
        let again = estimate_scheme(&model, &Scheme::StatSemi, 2, 5.0, q, 300, 7, &Sequential).unwrap();
        assert_eq!(d.i_test, again.mutual_info);
        assert!(semi.mse.mean > 0.0 && semi.mse.mean < 1.0);
        assert!(estimate_scheme(&model, &Scheme::StatLoaded { lambda: vec![2.0] }, 2, 5.0, q, 10, 4, &Sequential).is_err());
    }

    #[test]
    fn estimates() {
        let e = MCEstimate::from_samples(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(e.mean, 2.5);
        assert!((e.stderr - fmath::sqrt(5.0 / 3.0 / 4.0)).abs() < 1e-15);
        let r = MCEstimate::ratio_of_means(&[2.0, 4.0], &[1.0, 2.0]).unwrap();
        assert_eq!(r.mean, 2.0);
        assert_eq!(r.stderr, 0.0);
        assert!(MCEstimate::ratio_of_means(&[1.0], &[0.0]).is_err());
    }

    #[test]
    fn identical_schemes_give_zero() {
        let model: ChannelModel = SeparableModel::diagonal(vec![9.80, 5.66, 0.45, 0.09], vec![8.58, 4.20, 1.98, 1.24]).unwrap().into();
        let r = estimate_delta(&model, &spec(Scheme::StatSemi, Scheme::StatSemi, 2, 10.0, 200), &Sequential).unwrap();
        for e in [r.delta_i, r.delta_i_tilde, r.delta_p, r.delta_mse] {
            assert_eq!(e.mean, 0.0);
        }
        assert!(r.delta_sinr.iter().all(|d| d.mean == 0.0));
    }

    #[test]
    fn split_adds_up_and_matched_second_term_vanishes() {
        let mut r = stream(30, 0);
        let model: ChannelModel = make_matched(4, 4, 2, 16.0, Bases::Random, &mut r).unwrap().into();
        let rep = estimate_delta(&model, &spec(Scheme::PerfUnconst, Scheme::StatSemi, 2, 3.0, 300), &Sequential).unwrap();
        assert!((rep.delta_i1.mean + rep.delta_i2.mean - rep.delta_i.mean).abs() < 1e-12);
        assert!(rep.delta_i2.mean.abs() < 1e-10);
        assert!(rep.delta_i_tilde2.mean.abs() < 1e-10);
        assert!(rep.delta_i1.mean >= 0.0);
    }

    #[test]
    fn mismatched_loss_is_positive() {
        let model: ChannelModel = SeparableModel::diagonal(vec![4.0; 4], vec![4.0; 4]).unwrap().into();
        let rep = estimate_delta(&model, &spec(Scheme::PerfUnconst, Scheme::StatSemi, 2, 10.0, 500), &Sequential).unwrap();
        assert!(rep.delta_i.mean > 0.1);
        assert!(rep.delta_p.mean > 0.0 && rep.delta_mse.mean > 0.0);
        assert!(rep.delta_sinr.iter().all(|d| d.mean > 0.0));
        let again = estimate_delta(&model, &spec(Scheme::PerfUnconst, Scheme::StatSemi, 2, 10.0, 500), &Sequential).unwrap();
        assert_eq!(rep, again);
    }

    #[test]
    fn error_prob_forms_agree_when_small() {
        let model: ChannelModel = SeparableModel::diagonal(vec![9.0, 7.0], vec![16.0, 0.0]).unwrap().into();
        let mut s = spec(Scheme::PerfUnconst, Scheme::StatSemi, 1, 10.0, 400);
        s.constellation = Constellation::bpsk();
        let rep = estimate_delta(&model, &s, &Sequential).unwrap();
        assert!((rep.delta_p.mean - rep.delta_p_any.mean).abs() < 1e-9 * rep.delta_p.mean.abs().max(1.0));
        assert_eq!(rep.discarded_p, 0);
        let model: ChannelModel = SeparableModel::diagonal(vec![6.0, 5.0, 3.0, 2.0], vec![4.0; 4]).unwrap().into();
        let s = spec(Scheme::PerfUnconst, Scheme::StatSemi, 2, 100.0, 400);
        let rep = estimate_delta(&model, &s, &Sequential).unwrap();
        assert!(rep.p_bench.mean < 1e-3);
        assert!((rep.delta_p.mean / rep.delta_p_any.mean - 1.0).abs() < 0.5);
    }

    #[test]
    fn beamforming() {
        let rank1: ChannelModel = SeparableModel::diagonal(vec![16.0, 0.0, 0.0, 0.0], vec![4.0; 4]).unwrap().into();
        let r = estimate_delta_beamforming(&rank1, 10.0, Constellation::bpsk(), 200, 1, &Sequential).unwrap();
        assert!(r.delta_i_bf.mean.abs() < 1e-12);
        let iid: ChannelModel = SeparableModel::diagonal(vec![4.0; 4], vec![4.0; 4]).unwrap().into();
        let r = estimate_delta_beamforming(&iid, 10.0, Constellation::bpsk(), 2000, 1, &Sequential).unwrap();
        assert!(r.delta_i_bf.mean > 0.0);
        let full = estimate_delta(&iid, &DeltaSpec { seed: 1, ..spec(Scheme::PerfUnconst, Scheme::StatSemi, 1, 10.0, 2000) }, &Sequential).unwrap();
        assert!((full.delta_i.mean - r.delta_i_bf.mean).abs() < 1e-9);
        let mut prev = f64::MAX;
        for nr in [4usize, 16, 64] {
            let m: ChannelModel = SeparableModel::diagonal(vec![4.0; 4], vec![16.0 / nr as f64; nr]).unwrap().into();
            let d = estimate_delta_beamforming(&m, 10.0, Constellation::bpsk(), 2000, 2, &Sequential).unwrap().delta_i_bf.mean;
            assert!(d <= prev);
            prev = d;
        }
    }

    #[test]
    fn sinr_identity_on_random_separable_channels() {
        let mut r = stream(31, 0);
        let mut worst: f64 = 0.0;
        for _ in 0..1000 {
            let mut lt: Vec<f64> = (0..4).map(|_| 0.1 + uniform(&mut r)).collect();
            lt.sort_by(|a, b| b.total_cmp(a));
            let s: f64 = lt.iter().sum();
            let mut lr: Vec<f64> = (0..4).map(|_| 0.1 + uniform(&mut r)).collect();
            lr.sort_by(|a, b| b.total_cmp(a));
            let sr: f64 = lr.iter().sum();
            lr.iter_mut().for_each(|x| *x *= s / sr);
            let model: ChannelModel = SeparableModel::new(random_unitary(4, &mut r), random_unitary(4, &mut r), lt, lr).unwrap().into();
            let h = model.sample(&mut r).h;
            let m = 1 + (uniform(&mut r) * 3.0) as usize;
            let rho = fmath::powf(10.0, 3.0 * uniform(&mut r) - 1.0);
            for k in 0..m {
                worst = worst.max(delta_sinr_discrepancy(&h, &model, m, rho, k).unwrap());
            }
        }
        assert!(worst < 1e-8, "{}", worst);
    }

    #[test]
    fn sinr_identity_rejects_canonical() {
        let model: ChannelModel = SeparableModel::diagonal(vec![2.0, 2.0], vec![4.0]).unwrap().to_canonical().into();
        let h = CMatrix::identity(2).leading_columns(2).submatrix(&[0], &[0, 1]);
        assert!(delta_sinr_identity_check(&h, &model, 1, 1.0, 0).is_err());
    }

    #[test]
    fn spearman_basics() {
        assert!((spearman(&[1.0, 2.0, 3.0], &[10.0, 20.0, 30.0]).unwrap() - 1.0).abs() < 1e-15);
        assert!((spearman(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]).unwrap() + 1.0).abs() < 1e-15);
        assert_eq!(ranks(&[1.0, 1.0, 3.0]), [1.5, 1.5, 3.0]);
        assert!(spearman(&[1.0, 1.0], &[1.0, 2.0]).is_err());
    }
}

//! Fast invariant suite behind `corrmimo selftest`.

use std::str::FromStr;

use corrmimo_core::channel::{ChannelModel, SeparableModel};
use corrmimo_core::exec::Sequential;
use corrmimo_core::link::{self, Constellation};
use corrmimo_core::majorization::{majorizes, random_majorized_pair, unitary_stochastic_from_majorization};
use corrmimo_core::matcore::{hermitian_eigenvalues, poincare_check, CMatrix};
use corrmimo_core::metrics::{delta_sinr_identity_check, estimate_delta, DeltaSpec, Scheme};
use corrmimo_core::precoding::{self, waterfill};
use corrmimo_core::rng::{complex_gaussian_matrix, random_hermitian, random_orthonormal, stream};
use rand::Rng;

use crate::parallel::RayonExecutor;
use crate::CliError;

/// Deliberate defects for exercising the harness itself.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fault {
    /// Shifts power between the first two waterfilling levels.
    Waterfill,
    /// Inflates the closed-form SINR.
    Sinr,
}

impl FromStr for Fault {
    type Err = CliError;
    fn from_str(s: &str) -> Result<Self, CliError> {
        match s {
            "waterfill" => Ok(Fault::Waterfill),
            "sinr" => Ok(Fault::Sinr),
            _ => Err(CliError::Config(format!("field `inject-fault`: unknown fault `{s}` (expected waterfill or sinr)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteResult {
    pub name: &'static str,
    pub passed: usize,
    pub total: usize,
    /// First few failing cases.
    pub failures: Vec<String>,
}

impl SuiteResult {
    pub fn ok(&self) -> bool {
        self.passed == self.total
    }
}

struct Suite {
    name: &'static str,
    passed: usize,
    total: usize,
    failures: Vec<String>,
}

impl Suite {
    fn new(name: &'static str) -> Self {
        Self { name, passed: 0, total: 0, failures: Vec::new() }
    }

    fn check(&mut self, ok: bool, detail: impl FnOnce() -> String) {
        self.total += 1;
        if ok {
            self.passed += 1;
        } else if self.failures.len() < 3 {
            self.failures.push(detail());
        }
    }

    fn done(self) -> SuiteResult {
        SuiteResult { name: self.name, passed: self.passed, total: self.total, failures: self.failures }
    }
}

/// Best allocation over every active set; the log-det objective is strictly
/// concave, so the best feasible active-set solution is the optimum.
pub fn waterfill_exhaustive(lambda: &[f64], rho: f64) -> Vec<f64> {
    let n = lambda.len();
    let mut best = (f64::NEG_INFINITY, vec![0.0; n]);
    for mask in 1u32..(1 << n) {
        let active: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
        let mu = (rho + active.iter().map(|&i| 1.0 / lambda[i]).sum::<f64>()) / active.len() as f64;
        let mut p = vec![0.0; n];
        let mut feasible = true;
        for &i in &active {
            p[i] = mu - 1.0 / lambda[i];
            feasible &= p[i] >= 0.0;
        }
        if feasible {
            let obj: f64 = (0..n).map(|i| (1.0 + lambda[i] * p[i]).ln()).sum();
            if obj > best.0 {
                best = (obj, p);
            }
        }
    }
    best.1
}

fn waterfill_suite(fault: Option<Fault>) -> SuiteResult {
    let mut s = Suite::new("waterfill_oracle");
    let wf = |l: &[f64], rho: f64| -> Vec<f64> {
        let mut v = waterfill(l, rho).map(|r| r.lambda_wf).unwrap_or_default();
        if fault == Some(Fault::Waterfill) && v.len() >= 2 {
            v[0] += 1e-3;
            v[1] -= 1e-3;
        }
        v
    };
    for (l, rho, want) in [(vec![4.0, 1.0], 1.0, vec![0.875, 0.125]), (vec![4.0, 1.0], 0.5, vec![0.5, 0.0])] {
        let got = wf(&l, rho);
        let ok = got.len() == want.len() && got.iter().zip(&want).all(|(a, b)| (a - b).abs() < 1e-12);
        s.check(ok, || format!("lambda {l:?} rho {rho}: got {got:?}, want {want:?}"));
    }
    let mut r = stream(0x5e1f, 0);
    for _ in 0..300 {
        let d = r.random_range(1..=8);
        let mut l: Vec<f64> = (0..d).map(|_| 10f64.powf(r.random_range(-2.0..2.0))).collect();
        l.sort_by(|a, b| b.total_cmp(a));
        let rho = 10f64.powf(r.random_range(-2.0..3.0));
        let got = wf(&l, rho);
        let want = waterfill_exhaustive(&l, rho);
        let dev = got.iter().zip(&want).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        s.check(got.len() == d && dev < 1e-10, || format!("lambda {l:?} rho {rho}: deviation {dev:e}"));
    }
    s.done()
}

/// SINR from the explicit MMSE filters: signal over interference plus noise.
pub fn sinr_from_filters(h: &CMatrix, f: &CMatrix) -> Vec<f64> {
    let w = link::mmse_filters(h, f).expect("filters");
    let hf = h * f;
    let m = f.cols();
    (0..m)
        .map(|k| {
            let wk = w.column(k);
            let gain = |j: usize| -> f64 {
                let c = hf.column(j);
                wk.iter().zip(&c).map(|(a, b)| a.conj() * b).sum::<corrmimo_core::C64>().norm_sqr()
            };
            let interference: f64 = (0..m).filter(|&j| j != k).map(gain).sum();
            let noise: f64 = wk.iter().map(|a| a.norm_sqr()).sum();
            gain(k) / (interference + noise)
        })
        .collect()
}

fn sinr_suite(fault: Option<Fault>) -> SuiteResult {
    let mut s = Suite::new("sinr_dual_formula");
    let mut r = stream(0x5e1f, 1);
    for _ in 0..200 {
        let (n_r, n_t) = (r.random_range(1..=6), r.random_range(1..=6));
        let m = r.random_range(1..=n_t.min(n_r));
        let h = complex_gaussian_matrix(n_r, n_t, 1.0, &mut r);
        let f = complex_gaussian_matrix(n_t, m, 10f64.powf(r.random_range(-1.0..1.0)), &mut r);
        let mut closed = link::sinr(&h, &f).unwrap_or_default();
        if fault == Some(Fault::Sinr) {
            closed.iter_mut().for_each(|x| *x *= 1.0 + 1e-6);
        }
        let direct = sinr_from_filters(&h, &f);
        let dev = closed.iter().zip(&direct).map(|(a, b)| (a - b).abs() / b.abs().max(1e-300)).fold(0.0, f64::max);
        s.check(closed.len() == m && dev < 1e-9, || format!("{n_r}x{n_t}, m = {m}: relative deviation {dev:e}"));
    }
    s.done()
}

fn delta_sinr_suite() -> SuiteResult {
    let mut s = Suite::new("delta_sinr_identity");
    let mut r = stream(0x5e1f, 2);
    for t in 0..100 {
        let mut lt: Vec<f64> = (0..4).map(|_| r.random_range(0.1..4.0)).collect();
        let mut lr: Vec<f64> = (0..4).map(|_| r.random_range(0.1..4.0)).collect();
        lt.sort_by(|a, b| b.total_cmp(a));
        lr.sort_by(|a, b| b.total_cmp(a));
        let total_t: f64 = lt.iter().sum();
        let total_r: f64 = lr.iter().sum();
        lr.iter_mut().for_each(|x| *x *= total_t / total_r);
        let model: ChannelModel = SeparableModel::diagonal(lt, lr).expect("valid").into();
        let h = model.sample(&mut r).h;
        let rho = 10f64.powf(r.random_range(-1.0..2.0));
        for k in 0..2 {
            let ok = delta_sinr_identity_check(&h, &model, 2, rho, k).unwrap_or(false);
            s.check(ok, || format!("draw {t}, stream {k}"));
        }
    }
    s.done()
}

fn matched_suite() -> SuiteResult {
    let mut s = Suite::new("matched_exactness");
    let model: ChannelModel = SeparableModel::diagonal(vec![8.0, 8.0, 0.0, 0.0], vec![4.0; 4]).expect("valid").into();
    let mut r = stream(0x5e1f, 3);
    for t in 0..100 {
        let h = model.sample(&mut r).h;
        let rho = 10f64.powf(r.random_range(-1.0..3.0));
        let perf = precoding::perfect_semiunitary(&h, 2, rho).and_then(|p| link::mutual_info(&h, &p.effective()));
        let stat = precoding::stat_semiunitary(&model, 2, rho).and_then(|p| link::mutual_info(&h, &p.effective()));
        let dev = match (perf, stat) {
            (Ok(a), Ok(b)) => (a - b).abs(),
            _ => f64::INFINITY,
        };
        s.check(dev < 1e-9, || format!("draw {t}: |I_perf - I_stat| = {dev:e}"));
    }
    s.done()
}

fn majorization_suite() -> SuiteResult {
    let mut s = Suite::new("majorization");
    let mut r = stream(0x5e1f, 4);
    for _ in 0..200 {
        let n = r.random_range(1..=8);
        let a = random_hermitian(n, &mut r);
        let mut d = a.diag_real();
        d.sort_by(|x, y| y.total_cmp(x));
        let ok = hermitian_eigenvalues(&a).ok().and_then(|ev| majorizes(&d, &ev).ok()).unwrap_or(false);
        s.check(ok, || format!("schur-horn, n = {n}"));

        let k = r.random_range(1..=n);
        let w = random_orthonormal(n, k, &mut r);
        s.check(poincare_check(&a, &w).unwrap_or(false), || format!("poincare, n = {n}, k = {k}"));

        let m = r.random_range(2..=8);
        let (u, v) = random_majorized_pair(m, &mut r);
        let dev = unitary_stochastic_from_majorization(&u, &v)
            .map(|p| p.apply(&v).iter().zip(&u).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max))
            .unwrap_or(f64::INFINITY);
        s.check(dev < 1e-10, || format!("u = vQ, m = {m}: deviation {dev:e}"));
    }
    s.done()
}

fn q_bounds_suite() -> SuiteResult {
    let mut s = Suite::new("q_bounds");
    for i in 0..=89 {
        let x = 1.1 + 0.1 * i as f64;
        let q = link::q_function(x);
        let ok = link::q_bounds(x).map(|(lo, hi)| lo <= q && q <= hi).unwrap_or(false);
        s.check(ok, || format!("x = {x}"));
    }
    s.done()
}

fn determinism_suite() -> SuiteResult {
    let mut s = Suite::new("executor_determinism");
    let model: ChannelModel = SeparableModel::diagonal(vec![9.0, 5.0, 1.5, 0.5], vec![4.0; 4]).expect("valid").into();
    let spec = DeltaSpec {
        m: 2,
        rho: 10.0,
        benchmark: Scheme::PerfUnconst,
        test: Scheme::StatSemi,
        constellation: Constellation::qpsk(),
        trials: 200,
        seed: 11,
    };
    let base = estimate_delta(&model, &spec, &Sequential);
    for threads in [1, 2, 4] {
        let other = estimate_delta(&model, &spec, &RayonExecutor::new(threads));
        let same = matches!((&base, &other), (Ok(a), Ok(b)) if a == b);
        s.check(same, || format!("{threads} threads differ from sequential"));
    }
    s.done()
}

/// Runs every suite in a fixed order.
pub fn run(fault: Option<Fault>) -> Vec<SuiteResult> {
    vec![
        waterfill_suite(fault),
        sinr_suite(fault),
        delta_sinr_suite(),
        matched_suite(),
        majorization_suite(),
        q_bounds_suite(),
        determinism_suite(),
    ]
}

/// One line per suite, then one per recorded failure.
pub fn report(results: &[SuiteResult]) -> String {
    let mut out = String::new();
    for r in results {
        out.push_str(&format!("suite {}: {}/{} passed\n", r.name, r.passed, r.total));
    }
    for r in results.iter().filter(|r| !r.ok()) {
        for f in &r.failures {
            out.push_str(&format!("FAIL {}: {}\n", r.name, f));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clean_run_passes() {
        let results = run(None);
        assert!(results.iter().all(SuiteResult::ok), "{}", report(&results));
        assert_eq!(report(&results), report(&run(None)));
    }

    #[test]
    fn injected_faults_are_named() {
        let results = run(Some(Fault::Waterfill));
        let bad: Vec<_> = results.iter().filter(|r| !r.ok()).map(|r| r.name).collect();
        assert_eq!(bad, ["waterfill_oracle"]);
        assert!(report(&results).contains("FAIL waterfill_oracle"));
        let results = run(Some(Fault::Sinr));
        assert!(results.iter().any(|r| r.name == "sinr_dual_formula" && !r.ok()));
    }

    #[test]
    fn exhaustive_oracle_hand_case() {
        assert_eq!(waterfill_exhaustive(&[4.0, 1.0], 0.5), vec![0.5, 0.0]);
    }
}

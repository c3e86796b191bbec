//! Majorization orders, Schur-convexity probing and unitary-stochastic
//! matrices realizing a majorization relation.

use alloc::vec::Vec;
use core::ops::Deref;

use rand::Rng;

use crate::error::{bail, Result};
use crate::fmath;
use crate::matcore::{CMatrix, RMatrix, C64};

const TOL: f64 = 1e-12;

/// Real vector kept in non-increasing order.
#[derive(Debug, Clone, PartialEq)]
pub struct OrderedVector(Vec<f64>);

impl OrderedVector {
    pub fn new(mut values: Vec<f64>) -> Self {
        sort_desc(&mut values);
        Self(values)
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for OrderedVector {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

fn sort_desc(v: &mut [f64]) {
    v.sort_by(|a, b| b.total_cmp(a));
}

/// Indices that sort `v` non-increasing (stable).
pub fn descending_order(v: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&i, &j| v[j].total_cmp(&v[i]));
    idx
}

// Sorted copies of both inputs scaled by a common positive factor.
fn normalized(a: &[f64], b: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    if a.len() != b.len() {
        bail!(Dimension, "vectors of length {} and {}", a.len(), b.len());
    }
    let scale = {
        let s = b.iter().map(|x| x.abs()).sum::<f64>().max(a.iter().map(|x| x.abs()).sum::<f64>());
        if s > 0.0 { s } else { 1.0 }
    };
    let mut a: Vec<f64> = a.iter().map(|x| x / scale).collect();
    let mut b: Vec<f64> = b.iter().map(|x| x / scale).collect();
    sort_desc(&mut a);
    sort_desc(&mut b);
    Ok((a, b))
}

fn prefix_gaps(a: &[f64], b: &[f64]) -> Vec<f64> {
    let (mut sa, mut sb) = (0.0, 0.0);
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            sa += x;
            sb += y;
            sb - sa
        })
        .collect()
}

/// `a ≺ b`: every prefix sum of `a` is at most that of `b`, with equal totals.
pub fn majorizes(a: &[f64], b: &[f64]) -> Result<bool> {
    let (a, b) = normalized(a, b)?;
    let gaps = prefix_gaps(&a, &b);
    let total_ok = gaps.last().is_none_or(|g| g.abs() <= TOL);
    Ok(total_ok && gaps.iter().all(|&g| g >= -TOL))
}

/// `a ≺_w b`: prefix sums of `a` at most those of `b`.
pub fn weakly_submajorizes(a: &[f64], b: &[f64]) -> Result<bool> {
    let (a, b) = normalized(a, b)?;
    Ok(prefix_gaps(&a, &b).iter().all(|&g| g >= -TOL))
}

/// `a ≺^w b`: prefix sums of `a` at least those of `b`.
pub fn weakly_supermajorizes(a: &[f64], b: &[f64]) -> Result<bool> {
    let (a, b) = normalized(a, b)?;
    Ok(prefix_gaps(&a, &b).iter().all(|&g| g <= TOL))
}

/// Unitary `gamma` with `q(i, j) = |gamma(i, j)|²` doubly stochastic.
#[derive(Debug, Clone)]
pub struct UnitaryStochasticPair {
    pub gamma: CMatrix,
    pub q: RMatrix,
}

impl UnitaryStochasticPair {
    fn from_gamma(gamma: CMatrix) -> Self {
        let q = RMatrix::from_fn(gamma.rows(), gamma.cols(), |i, j| gamma[(i, j)].norm_sqr());
        Self { gamma, q }
    }

    /// `v Q` as a row-vector product.
    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        (0..self.q.cols()).map(|j| v.iter().enumerate().map(|(i, x)| x * self.q[(i, j)]).sum()).collect()
    }
}

/// `M`-point unitary DFT. For `M = 2` this is the real Hadamard matrix.
pub fn dft(m: usize) -> CMatrix {
    let s = 1.0 / fmath::sqrt(m as f64);
    CMatrix::from_fn(m, m, |i, j| {
        let k = (i * j) % m;
        if k == 0 {
            return C64::new(s, 0.0);
        }
        if 2 * k == m {
            return C64::new(-s, 0.0);
        }
        let ang = -2.0 * core::f64::consts::PI * k as f64 / m as f64;
        C64::new(s * fmath::cos(ang), s * fmath::sin(ang))
    })
}

/// Builds unitary `Γ` with `Γᴴ diag(v) Γ` having diagonal `u`, so that
/// `u = v Q` for `Q = |Γ|²`. Entries of `u` and `v` may be in any order;
/// the output is indexed consistently with the inputs.
pub fn unitary_stochastic_from_majorization(u: &[f64], v: &[f64]) -> Result<UnitaryStochasticPair> {
    if !majorizes(u, v)? {
        bail!(Precondition, "u is not majorized by v");
    }
    let m = v.len();
    let scale = v.iter().map(|x| x.abs()).sum::<f64>().max(1e-300);
    if u.iter().zip(v).all(|(a, b)| (a - b).abs() <= TOL * scale) {
        return Ok(UnitaryStochasticPair::from_gamma(CMatrix::identity(m)));
    }
    let mean = u.iter().sum::<f64>() / m as f64;
    if u.iter().all(|x| (x - mean).abs() <= TOL * scale) {
        return Ok(UnitaryStochasticPair::from_gamma(dft(m)));
    }
    let sv = descending_order(v);
    let su = descending_order(u);
    let vs: Vec<f64> = sv.iter().map(|&i| v[i]).collect();
    let us: Vec<f64> = su.iter().map(|&i| u[i]).collect();
    let g = givens_chain(&us, &vs);
    let mut gamma = CMatrix::zeros(m, m);
    for i in 0..m {
        for l in 0..m {
            gamma[(sv[i], su[l])] = C64::new(g[i * m + l], 0.0);
        }
    }
    Ok(UnitaryStochasticPair::from_gamma(gamma))
}

// Real orthogonal Γ (row-major) with diag(Γᵀ diag(v) Γ) = u for sorted
// u ≺ v. Each plane rotation moves one diagonal entry onto its target.
fn givens_chain(u: &[f64], v: &[f64]) -> Vec<f64> {
    let m = v.len();
    let scale = v.iter().map(|x| x.abs()).sum::<f64>().max(1e-300);
    let mut a = alloc::vec![0.0; m * m];
    let mut g = alloc::vec![0.0; m * m];
    for i in 0..m {
        a[i * m + i] = v[i];
        g[i * m + i] = 1.0;
    }
    for _ in 0..m * m {
        let d: Vec<f64> = (0..m).map(|i| a[i * m + i]).collect();
        let slack = 1e-15 * scale;
        let Some(j) = (0..m).rev().find(|&i| d[i] > u[i] + slack) else { break };
        let Some(k) = (j + 1..m).find(|&i| d[i] < u[i] - slack) else { break };
        let delta = (d[j] - u[j]).min(u[k] - d[k]);
        let target = d[j] - delta;
        let mid = 0.5 * (d[j] + d[k]);
        let half = 0.5 * (d[j] - d[k]);
        let b = a[j * m + k];
        let r = fmath::hypot(half, b);
        if r == 0.0 {
            break;
        }
        let phi = fmath::atan2(b, half);
        let two_theta = phi + fmath::acos(((target - mid) / r).clamp(-1.0, 1.0));
        let c = fmath::cos(0.5 * two_theta);
        let s = fmath::sin(0.5 * two_theta);
        // Columns j, k of A and G get [c, -s; s, c] applied on the right.
        for row in 0..m {
            let (x, y) = (a[row * m + j], a[row * m + k]);
            a[row * m + j] = c * x + s * y;
            a[row * m + k] = -s * x + c * y;
            let (x, y) = (g[row * m + j], g[row * m + k]);
            g[row * m + j] = c * x + s * y;
            g[row * m + k] = -s * x + c * y;
        }
        for col in 0..m {
            let (x, y) = (a[j * m + col], a[k * m + col]);
            a[j * m + col] = c * x + s * y;
            a[k * m + col] = -s * x + c * y;
        }
    }
    g
}

/// Outcome of a randomized Schur-convexity probe. A flag is set when the
/// corresponding inequality held on every sampled pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SchurVerdict {
    pub concave: bool,
    pub convex: bool,
}

/// Samples pairs `a ≺ b` by pushing a random positive `b` through a chain
/// of random T-transforms, then checks `f(a) ≥ f(b)` (concave) and
/// `f(a) ≤ f(b)` (convex). This can only falsify, never certify.
pub fn schur_probe<F, R>(f: F, dim: usize, trials: usize, rng: &mut R) -> Result<SchurVerdict>
where
    F: Fn(&[f64]) -> f64,
    R: Rng + ?Sized,
{
    if dim < 2 || trials == 0 {
        bail!(InvalidArgument, "schur_probe needs dim >= 2 and trials >= 1");
    }
    let mut verdict = SchurVerdict { concave: true, convex: true };
    for _ in 0..trials {
        let (a, b) = random_majorized_pair(dim, rng);
        let (fa, fb) = (f(&a), f(&b));
        let tol = 1e-12 * (1.0 + fa.abs().max(fb.abs()));
        if fa < fb - tol {
            verdict.concave = false;
        }
        if fa > fb + tol {
            verdict.convex = false;
        }
    }
    Ok(verdict)
}

/// Random sorted pair `(a, b)` with `a ≺ b` and strictly positive entries.
pub fn random_majorized_pair<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> (Vec<f64>, Vec<f64>) {
    let mut b: Vec<f64> = (0..dim).map(|_| 0.05 + rng.random::<f64>()).collect();
    sort_desc(&mut b);
    let mut a = b.clone();
    let steps = 1 + rng.random_range(0..2 * dim);
    for _ in 0..steps {
        let i = rng.random_range(0..dim);
        let mut j = rng.random_range(0..dim - 1);
        if j >= i {
            j += 1;
        }
        let lam: f64 = rng.random();
        let (x, y) = (a[i], a[j]);
        a[i] = lam * x + (1.0 - lam) * y;
        a[j] = lam * y + (1.0 - lam) * x;
    }
    sort_desc(&mut a);
    (a, b)
}

/// `Σx ≤ (1/K)(Σ x/y)(Σ y)` for positive tuples.
pub fn k_tuple_inequality_check(x: &[f64], y: &[f64]) -> Result<bool> {
    if x.len() != y.len() || x.is_empty() {
        bail!(Dimension, "tuples of length {} and {}", x.len(), y.len());
    }
    if x.iter().chain(y).any(|&t| !(t > 0.0)) {
        bail!(InvalidArgument, "entries must be strictly positive");
    }
    let k = x.len() as f64;
    let lhs: f64 = x.iter().sum();
    let ratio: f64 = x.iter().zip(y).map(|(a, b)| a / b).sum();
    let ys: f64 = y.iter().sum();
    Ok(lhs <= ratio * ys / k + 1e-12)
}

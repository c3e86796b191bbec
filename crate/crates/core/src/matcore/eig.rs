use alloc::vec::Vec;

use super::matrix::{CMatrix, C64};
use crate::error::{bail, Error, Result};
use crate::fmath;

/// Eigendecomposition of a Hermitian matrix, eigenvalues non-increasing.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub eigenvalues: Vec<f64>,
    /// Unitary; column `k` pairs with `eigenvalues[k]`.
    pub eigenvectors: CMatrix,
}

const MAX_SWEEPS: usize = 100;

/// Cyclic complex Jacobi. The input is symmetrized before iterating.
pub fn hermitian_eig(a: &CMatrix) -> Result<HermitianEigen> {
    let (vals, vecs) = jacobi(a, true)?;
    Ok(HermitianEigen { eigenvalues: vals, eigenvectors: vecs.expect("vectors requested") })
}

/// Eigenvalues only, non-increasing.
pub fn hermitian_eigenvalues(a: &CMatrix) -> Result<Vec<f64>> {
    Ok(jacobi(a, false)?.0)
}

fn jacobi(a: &CMatrix, want_vectors: bool) -> Result<(Vec<f64>, Option<CMatrix>)> {
    if !a.is_square() {
        bail!(Dimension, "eigendecomposition of a {}x{} matrix", a.rows(), a.cols());
    }
    if !a.is_finite() {
        return Err(Error::NonFinite);
    }
    let n = a.rows();
    let mut m = a.hermitian_part();
    for i in 0..n {
        m[(i, i)].im = 0.0;
    }
    let mut v = if want_vectors { Some(CMatrix::identity(n)) } else { None };
    let scale = m.frobenius_norm();
    if scale > 0.0 {
        let target = f64::EPSILON * scale;
        for _ in 0..MAX_SWEEPS {
            let off: f64 = (0..n)
                .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
                .map(|(i, j)| m[(i, j)].norm_sqr())
                .sum();
            if fmath::sqrt(off) <= target {
                break;
            }
            for p in 0..n {
                for q in p + 1..n {
                    rotate(&mut m, v.as_mut(), p, q, target / n as f64);
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    let diag: Vec<f64> = (0..n).map(|i| m[(i, i)].re).collect();
    order.sort_by(|&i, &j| diag[j].total_cmp(&diag[i]));
    let vals = order.iter().map(|&i| diag[i]).collect();
    let vecs = v.map(|v| {
        let mut s = v.select_columns(&order);
        super::normalize_column_phases(&mut s, 1e-12);
        s
    });
    Ok((vals, vecs))
}

// One two-sided rotation zeroing entry (p, q).
fn rotate(m: &mut CMatrix, v: Option<&mut CMatrix>, p: usize, q: usize, skip: f64) {
    let apq = m[(p, q)];
    let r = apq.norm();
    if r <= skip * 1e-3 || r == 0.0 {
        return;
    }
    let ph = apq / r;
    let zeta = (m[(q, q)].re - m[(p, p)].re) / (2.0 * r);
    let t = if zeta >= 0.0 { 1.0 } else { -1.0 } / (zeta.abs() + fmath::sqrt(1.0 + zeta * zeta));
    let c = 1.0 / fmath::sqrt(1.0 + t * t);
    let s = t * c;
    let s_ph = ph * s;
    let s_phc = ph.conj() * s;
    let n = m.rows();
    for k in 0..n {
        let akp = m[(k, p)];
        let akq = m[(k, q)];
        m[(k, p)] = akp * c - s_phc * akq;
        m[(k, q)] = s_ph * akp + akq * c;
    }
    for k in 0..n {
        let apk = m[(p, k)];
        let aqk = m[(q, k)];
        m[(p, k)] = apk * c - s_ph * aqk;
        m[(q, k)] = s_phc * apk + aqk * c;
    }
    m[(p, q)] = C64::new(0.0, 0.0);
    m[(q, p)] = C64::new(0.0, 0.0);
    m[(p, p)].im = 0.0;
    m[(q, q)].im = 0.0;
    if let Some(v) = v {
        for k in 0..v.rows() {
            let vkp = v[(k, p)];
            let vkq = v[(k, q)];
            v[(k, p)] = vkp * c - s_phc * vkq;
            v[(k, q)] = s_ph * vkp + vkq * c;
        }
    }
}

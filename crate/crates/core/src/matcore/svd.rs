use alloc::vec::Vec;

use super::matrix::{dot_h, norm2, CMatrix, C64};
use crate::error::{Error, Result};
use crate::fmath;

/// `A = U Σ Vᴴ` with full unitary `U` (rows×rows) and `V` (cols×cols).
#[derive(Debug, Clone)]
pub struct SvdResult {
    pub left: CMatrix,
    /// `min(rows, cols)` values, non-increasing.
    pub singular_values: Vec<f64>,
    pub right: CMatrix,
}

impl SvdResult {
    /// Number of singular values above `rel_tol · σ_max`.
    pub fn rank(&self, rel_tol: f64) -> usize {
        let top = self.singular_values.first().copied().unwrap_or(0.0);
        if top == 0.0 {
            return 0;
        }
        self.singular_values.iter().filter(|&&s| s > rel_tol * top).count()
    }

    /// Eigenvalues of `AᴴA` restricted to the `min(rows, cols)` leading modes.
    pub fn gram_eigenvalues(&self) -> Vec<f64> {
        self.singular_values.iter().map(|s| s * s).collect()
    }
}

const MAX_SWEEPS: usize = 80;

/// One-sided Hestenes Jacobi SVD.
#[allow(clippy::needless_range_loop)]
pub fn svd(a: &CMatrix) -> Result<SvdResult> {
    if !a.is_finite() {
        return Err(Error::NonFinite);
    }
    let (m, n) = (a.rows(), a.cols());
    if m < n {
        // Wide input: factor the adjoint so no column has to collapse to zero.
        let t = svd(&a.adjoint())?;
        let mut right = t.left;
        let mut left = t.right;
        let phases = super::normalize_column_phases(&mut right, 1e-12);
        for j in 0..m {
            for i in 0..m {
                left[(i, j)] *= phases[j];
            }
        }
        return Ok(SvdResult { left, singular_values: t.singular_values, right });
    }
    let mut cols: Vec<Vec<C64>> = (0..n).map(|j| a.column(j)).collect();
    let mut v = CMatrix::identity(n);
    let eps = f64::EPSILON;
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha: f64 = cols[p].iter().map(|z| z.norm_sqr()).sum();
                let beta: f64 = cols[q].iter().map(|z| z.norm_sqr()).sum();
                let gamma = dot_h(&cols[p], &cols[q]);
                let g = gamma.norm();
                if g == 0.0 || g <= eps * fmath::sqrt(alpha * beta) {
                    continue;
                }
                rotated = true;
                let ph = gamma / g;
                let zeta = (beta - alpha) / (2.0 * g);
                let t = if zeta >= 0.0 { 1.0 } else { -1.0 } / (zeta.abs() + fmath::sqrt(1.0 + zeta * zeta));
                let c = 1.0 / fmath::sqrt(1.0 + t * t);
                let s = t * c;
                let s_ph = ph * s;
                let s_phc = ph.conj() * s;
                for k in 0..m {
                    let wp = cols[p][k];
                    let wq = cols[q][k];
                    cols[p][k] = wp * c - s_phc * wq;
                    cols[q][k] = s_ph * wp + wq * c;
                }
                for k in 0..n {
                    let vp = v[(k, p)];
                    let vq = v[(k, q)];
                    v[(k, p)] = vp * c - s_phc * vq;
                    v[(k, q)] = s_ph * vp + vq * c;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let norms: Vec<f64> = cols.iter().map(|c| norm2(c)).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| norms[j].total_cmp(&norms[i]));
    let mut right = v.select_columns(&order);
    let phases = super::normalize_column_phases(&mut right, 1e-12);
    let k = m.min(n);
    let sigma: Vec<f64> = order.iter().take(k).map(|&i| norms[i]).collect();
    let top = sigma.first().copied().unwrap_or(0.0);
    let mut basis: Vec<Vec<C64>> = Vec::with_capacity(m);
    for (j, &idx) in order.iter().take(k).enumerate() {
        let s = norms[idx];
        if s > top * 1e-13 && s > 0.0 {
            let u: Vec<C64> = cols[idx].iter().map(|&z| z * phases[j] / s).collect();
            basis.push(u);
        } else {
            break;
        }
    }
    complete_basis(&mut basis, m);
    let left = CMatrix::from_columns(m, &basis)?;
    Ok(SvdResult { left, singular_values: sigma, right })
}

// Extends orthonormal columns to a full basis of C^m using Gram-Schmidt
// against the standard basis vectors.
fn complete_basis(basis: &mut Vec<Vec<C64>>, m: usize) {
    let mut e = 0;
    while basis.len() < m && e < m {
        let mut w: Vec<C64> = (0..m).map(|i| C64::new(if i == e { 1.0 } else { 0.0 }, 0.0)).collect();
        for _ in 0..2 {
            for b in basis.iter() {
                let proj = dot_h(b, &w);
                for (wi, bi) in w.iter_mut().zip(b) {
                    *wi -= proj * bi;
                }
            }
        }
        let nw = norm2(&w);
        if nw > 1e-8 {
            basis.push(w.into_iter().map(|z| z / nw).collect());
        }
        e += 1;
    }
}

use super::eig::hermitian_eigenvalues;
use super::lu::{inverse, Lu};
use super::matrix::{CMatrix, C64};
use super::svd::svd;
use crate::error::{bail, Error, Result};

/// Checks the interlacing `λ_k(WᴴAW) ≤ λ_k(A)` for `k = 1..r`.
pub fn poincare_check(a: &CMatrix, w: &CMatrix) -> Result<bool> {
    if !a.is_square() || w.rows() != a.rows() {
        bail!(Dimension, "A is {}x{}, W is {}x{}", a.rows(), a.cols(), w.rows(), w.cols());
    }
    let dev = w.orthonormality_error();
    if dev > 1e-10 {
        return Err(Error::NotOrthonormal(dev));
    }
    let la = hermitian_eigenvalues(a)?;
    let b = w.adjoint_mul(&(a * w))?;
    let lb = hermitian_eigenvalues(&b)?;
    Ok(separation_holds(&lb, &la))
}

/// True iff `compressed[k] ≤ full[k] + 1e-10` for every `k` in `compressed`.
/// Both lists must be sorted non-increasing.
pub fn separation_holds(compressed: &[f64], full: &[f64]) -> bool {
    compressed.len() <= full.len() && compressed.iter().zip(full).all(|(b, a)| *b <= *a + 1e-10)
}

/// `det([[X, Y], [Z, W]]) = det(X − Y W⁻¹ Z) · det(W)` for invertible `W`.
pub fn block_det(x: &CMatrix, y: &CMatrix, z: &CMatrix, w: &CMatrix) -> Result<C64> {
    let n = x.rows();
    for (name, m) in [("X", x), ("Y", y), ("Z", z), ("W", w)] {
        if m.rows() != n || m.cols() != n {
            bail!(Dimension, "block {} is {}x{}, expected {}x{}", name, m.rows(), m.cols(), n, n);
        }
    }
    let s = svd(w)?;
    let smax = s.singular_values.first().copied().unwrap_or(0.0);
    let smin = s.singular_values.last().copied().unwrap_or(0.0);
    if smin == 0.0 || smax / smin >= 1e12 {
        bail!(Singular, "W has condition number {:e}", if smin == 0.0 { f64::INFINITY } else { smax / smin });
    }
    let schur = x - &(&(y * &inverse(w)?) * z);
    Ok(Lu::new(&schur)?.det() * Lu::new(w)?.det())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcore::det;
    use crate::rng;

    #[test]
    fn poincare_diagonal_case() {
        let a = CMatrix::from_real_diag(&[3.0, 2.0, 1.0]);
        let w = CMatrix::identity(3).leading_columns(2);
        assert!(poincare_check(&a, &w).unwrap());
    }

    #[test]
    fn poincare_rejects_non_orthonormal() {
        let a = CMatrix::identity(3);
        let w = CMatrix::identity(3).leading_columns(2).scale(2.0);
        assert!(matches!(poincare_check(&a, &w), Err(Error::NotOrthonormal(_))));
    }

    #[test]
    fn separation_checker_detects_perturbation() {
        let a = CMatrix::from_real_diag(&[3.0, 2.0, 1.0]);
        let w = CMatrix::identity(3).leading_columns(2);
        let b = w.adjoint_mul(&(&a * &w)).unwrap();
        let mut lb = hermitian_eigenvalues(&b).unwrap();
        assert!(separation_holds(&lb, &[3.0, 2.0, 1.0]));
        lb[1] += 1e-6;
        assert!(!separation_holds(&lb, &[3.0, 2.0, 1.0]));
    }

    #[test]
    fn block_det_scalar() {
        let one = |v: f64| CMatrix::from_real(1, 1, &[v]).unwrap();
        let d = block_det(&one(1.0), &one(2.0), &one(3.0), &one(4.0)).unwrap();
        assert!((d - C64::new(-2.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn block_det_zero_coupling() {
        let mut r = rng::stream(5, 0);
        let x = rng::complex_gaussian_matrix(3, 3, 1.0, &mut r);
        let w = rng::complex_gaussian_matrix(3, 3, 1.0, &mut r);
        let z = CMatrix::zeros(3, 3);
        let d = block_det(&x, &z, &z, &w).unwrap();
        let expect = det(&x).unwrap() * det(&w).unwrap();
        assert!((d - expect).norm() < 1e-10 * expect.norm());
    }

    #[test]
    fn block_det_matches_assembled() {
        for seed in 0..50 {
            let mut r = rng::stream(seed, 2);
            let b: alloc::vec::Vec<CMatrix> = (0..4).map(|_| rng::complex_gaussian_matrix(3, 3, 1.0, &mut r)).collect();
            let full = CMatrix::from_fn(6, 6, |i, j| {
                let blk = &b[(i / 3) * 2 + j / 3];
                blk[(i % 3, j % 3)]
            });
            let d = block_det(&b[0], &b[1], &b[2], &b[3]).unwrap();
            let expect = det(&full).unwrap();
            assert!((d - expect).norm() <= 1e-8 * expect.norm(), "seed {seed}");
        }
    }

    #[test]
    fn block_det_singular_w() {
        let i = CMatrix::identity(2);
        let w = CMatrix::from_real(2, 2, &[1.0, 1.0, 1.0, 1.0]).unwrap();
        assert!(matches!(block_det(&i, &i, &i, &w), Err(Error::Singular(_))));
    }
}

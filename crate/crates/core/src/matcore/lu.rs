use alloc::vec::Vec;

use super::matrix::{CMatrix, C64};
use crate::error::{bail, Error, Result};

/// LU factorization with partial pivoting, `P A = L U` packed in one matrix.
#[derive(Debug, Clone)]
pub struct Lu {
    packed: CMatrix,
    perm: Vec<usize>,
    sign: f64,
    singular: bool,
}

impl Lu {
    pub fn new(a: &CMatrix) -> Result<Self> {
        if !a.is_square() {
            bail!(Dimension, "LU of a {}x{} matrix", a.rows(), a.cols());
        }
        if !a.is_finite() {
            return Err(Error::NonFinite);
        }
        let n = a.rows();
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut sign = 1.0;
        let mut singular = false;
        for k in 0..n {
            let (piv, best) = (k..n)
                .map(|i| (i, lu[(i, k)].norm_sqr()))
                .fold((k, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
            if best == 0.0 {
                singular = true;
                continue;
            }
            if piv != k {
                for j in 0..n {
                    let t = lu[(k, j)];
                    lu[(k, j)] = lu[(piv, j)];
                    lu[(piv, j)] = t;
                }
                perm.swap(k, piv);
                sign = -sign;
            }
            let d = lu[(k, k)];
            for i in k + 1..n {
                let f = lu[(i, k)] / d;
                lu[(i, k)] = f;
                for j in k + 1..n {
                    let u = lu[(k, j)];
                    lu[(i, j)] -= f * u;
                }
            }
        }
        Ok(Self { packed: lu, perm, sign, singular })
    }

    pub fn det(&self) -> C64 {
        if self.singular {
            return C64::new(0.0, 0.0);
        }
        let n = self.packed.rows();
        (0..n).fold(C64::new(self.sign, 0.0), |acc, i| acc * self.packed[(i, i)])
    }

    /// Solves `A X = B`.
    pub fn solve(&self, b: &CMatrix) -> Result<CMatrix> {
        let n = self.packed.rows();
        if b.rows() != n {
            bail!(Dimension, "right-hand side has {} rows, expected {}", b.rows(), n);
        }
        if self.singular {
            bail!(Singular, "zero pivot in LU factorization");
        }
        let mut x = CMatrix::from_fn(n, b.cols(), |i, j| b[(self.perm[i], j)]);
        for c in 0..b.cols() {
            for i in 0..n {
                let mut s = x[(i, c)];
                for k in 0..i {
                    s -= self.packed[(i, k)] * x[(k, c)];
                }
                x[(i, c)] = s;
            }
            for i in (0..n).rev() {
                let mut s = x[(i, c)];
                for k in i + 1..n {
                    s -= self.packed[(i, k)] * x[(k, c)];
                }
                x[(i, c)] = s / self.packed[(i, i)];
            }
        }
        Ok(x)
    }
}

pub fn det(a: &CMatrix) -> Result<C64> {
    Ok(Lu::new(a)?.det())
}

pub fn inverse(a: &CMatrix) -> Result<CMatrix> {
    Lu::new(a)?.solve(&CMatrix::identity(a.rows()))
}

pub fn solve(a: &CMatrix, b: &CMatrix) -> Result<CMatrix> {
    Lu::new(a)?.solve(b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    #[test]
    fn small_determinants() {
        let a = CMatrix::from_real(2, 2, &[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert!((det(&a).unwrap() - C64::new(-2.0, 0.0)).norm() < 1e-14);
        let s = CMatrix::from_real(2, 2, &[1.0, 2.0, 2.0, 4.0]).unwrap();
        assert_eq!(det(&s).unwrap(), C64::new(0.0, 0.0));
        assert!(inverse(&s).is_err());
    }

    #[test]
    fn inverse_roundtrip() {
        for seed in 0..20 {
            let mut r = rng::stream(seed, 1);
            let a = rng::complex_gaussian_matrix(5, 5, 1.0, &mut r);
            let inv = inverse(&a).unwrap();
            assert!((&(&a * &inv) - &CMatrix::identity(5)).max_abs() < 1e-10);
        }
    }

    #[test]
    fn det_of_unitary_has_unit_modulus() {
        let mut r = rng::stream(3, 9);
        let u = rng::random_unitary(4, &mut r);
        assert!((det(&u).unwrap().norm() - 1.0).abs() < 1e-12);
    }
}

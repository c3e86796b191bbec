//! Seeded random streams and Gaussian helpers.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::fmath;
use crate::matcore::{dot_h, norm2, CMatrix, C64};

pub type Stream = ChaCha8Rng;

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Sub-seed for trial `index` under `master`.
pub fn sub_seed(master: u64, index: u64) -> u64 {
    splitmix(splitmix(master) ^ index.wrapping_mul(0xd1b5_4a32_d192_ed03))
}

/// Independent stream for trial `index` under `master`.
pub fn stream(master: u64, index: u64) -> Stream {
    ChaCha8Rng::seed_from_u64(sub_seed(master, index))
}

/// Circularly symmetric complex Gaussian with total variance `var`.
/// Both real draws are consumed even when `var` is zero so streams stay
/// aligned across models.
pub fn complex_gaussian<R: Rng + ?Sized>(var: f64, rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    let s = fmath::sqrt(var / 2.0);
    C64::new(re * s, im * s)
}

pub fn complex_gaussian_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, var: f64, rng: &mut R) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| complex_gaussian(var, rng))
}

/// Haar-distributed unitary via Gram-Schmidt on a Gaussian matrix.
pub fn random_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMatrix {
    random_orthonormal(n, n, rng)
}

/// `n × r` matrix with orthonormal columns, uniformly distributed.
pub fn random_orthonormal<R: Rng + ?Sized>(n: usize, r: usize, rng: &mut R) -> CMatrix {
    assert!(r <= n);
    loop {
        let g = complex_gaussian_matrix(n, r, 1.0, rng);
        let mut cols: Vec<Vec<C64>> = Vec::with_capacity(r);
        let mut ok = true;
        for j in 0..r {
            let mut w = g.column(j);
            for _ in 0..2 {
                for b in &cols {
                    let p = dot_h(b, &w);
                    for (wi, bi) in w.iter_mut().zip(b) {
                        *wi -= p * bi;
                    }
                }
            }
            let nw = norm2(&w);
            if nw < 1e-8 {
                ok = false;
                break;
            }
            cols.push(w.into_iter().map(|z| z / nw).collect());
        }
        if ok {
            return CMatrix::from_columns(n, &cols).expect("column lengths match");
        }
    }
}

/// Random Hermitian matrix `(G + Gᴴ)/2` with unit-variance Gaussian `G`.
pub fn random_hermitian<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMatrix {
    complex_gaussian_matrix(n, n, 1.0, rng).hermitian_part()
}

/// Uniform draw in `[0, 1)`.
pub fn uniform<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.random::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a: u64 = stream(1, 2).random();
        let b: u64 = stream(1, 2).random();
        let c: u64 = stream(1, 3).random();
        let d: u64 = stream(2, 2).random();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_ne!(a, d);
    }

    #[test]
    fn unitary_is_unitary() {
        let mut r = stream(0, 0);
        let u = random_unitary(6, &mut r);
        assert!(u.orthonormality_error() < 1e-12);
        let w = random_orthonormal(6, 3, &mut r);
        assert!(w.orthonormality_error() < 1e-12);
    }

    #[test]
    fn gaussian_variance() {
        let mut r = stream(9, 0);
        let n = 200_000;
        let s: f64 = (0..n).map(|_| complex_gaussian(2.0, &mut r).norm_sqr()).sum();
        assert!((s / n as f64 - 2.0).abs() < 0.03);
    }

    #[test]
    fn zero_variance_still_consumes() {
        let mut a = stream(4, 4);
        let mut b = stream(4, 4);
        let _ = complex_gaussian(0.0, &mut a);
        let _ = complex_gaussian(1.0, &mut b);
        assert_eq!(a.random::<u64>(), b.random::<u64>());
    }
}

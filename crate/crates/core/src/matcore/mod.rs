//! Dense complex linear algebra for the small matrices used throughout the
//! crate (n up to a few hundred).

mod eig;
mod lemmas;
mod lu;
mod matrix;
mod svd;

pub use eig::{hermitian_eig, hermitian_eigenvalues, HermitianEigen};
pub use lemmas::{block_det, poincare_check, separation_holds};
pub use lu::{det, inverse, solve, Lu};
pub use matrix::{dot_h, norm2, CMatrix, RMatrix, C64};
pub use svd::{svd, SvdResult};

/// Rotates each column so its first entry with magnitude above `tol` is
/// real and positive. Returns the applied unit phases.
pub(crate) fn normalize_column_phases(v: &mut CMatrix, tol: f64) -> alloc::vec::Vec<C64> {
    let mut phases = alloc::vec::Vec::with_capacity(v.cols());
    for j in 0..v.cols() {
        let mut ph = C64::new(1.0, 0.0);
        for i in 0..v.rows() {
            let z = v[(i, j)];
            let r = z.norm();
            if r > tol {
                ph = z.conj() / r;
                break;
            }
        }
        for i in 0..v.rows() {
            v[(i, j)] *= ph;
        }
        phases.push(ph);
    }
    phases
}

//! Dense complex linear algebra substrate.
//!
//! Everything downstream depends only on the functions re-exported here.

mod functions;
mod hermitian;
mod matrix;
mod schur;
mod solve;

pub use functions::{
    arg_cut_at_one, hermitian_function, matrix_exp, normal_function, polar_unitary, unitary_log_hermitian,
};
pub use hermitian::{
    complement_frame, herm_eig, herm_eig_with, null_space, orthonormal_frame, rank, reorthonormalize,
    singular_values, svd, sylvester_inertia, Svd,
};
pub use matrix::{c, r, CMat, C64, I, ONE, ZERO};
pub use schur::{eig, eigenvalues, EigenDecomposition};
pub use solve::{inverse, solve, solve_with, Lu};

/// Smallest singular value (0 for empty matrices).
pub fn smallest_singular_value(a: &CMat) -> f64 {
    if a.rows() == 0 || a.cols() == 0 {
        return f64::INFINITY;
    }
    singular_values(a).last().copied().unwrap_or(0.0)
}

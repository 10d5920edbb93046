//! Matrix functions: exponential, hermitian spectral calculus, unitary logarithm.

use std::f64::consts::PI;

use super::hermitian::herm_eig;
use super::matrix::{c, CMat, C64};
use super::schur::eig;
use crate::error::Result;

/// Matrix exponential by scaling and squaring with a degree-18 Taylor core.
pub fn matrix_exp(a: &CMat) -> CMat {
    assert!(a.is_square(), "matrix_exp needs a square matrix");
    let n = a.rows();
    let nrm = a.norm();
    let mut s = 0u32;
    if nrm > 0.25 {
        s = (nrm / 0.25).log2().ceil() as u32;
    }
    let scaled = a.scale_re(0.5f64.powi(s as i32));
    let mut result = CMat::identity(n);
    let mut term = CMat::identity(n);
    for k in 1..=18 {
        term = (&term * &scaled).scale_re(1.0 / k as f64);
        result = &result + &term;
    }
    for _ in 0..s {
        result = &result * &result;
    }
    result
}

/// `f(A)` for hermitian `A` via its eigendecomposition.
pub fn hermitian_function(a: &CMat, f: impl Fn(f64) -> C64) -> Result<CMat> {
    let (d, v) = herm_eig(a)?;
    let fd: Vec<C64> = d.iter().map(|&x| f(x)).collect();
    Ok(&v * CMat::diag(&fd) * v.adjoint())
}

/// `f(A)` for a normal matrix `A` from its (numerically diagonal) Schur form.
pub fn normal_function(a: &CMat, f: impl Fn(C64) -> C64) -> Result<CMat> {
    let d = eig(a)?;
    let fd: Vec<C64> = d.eigenvalues.iter().map(|&z| f(z)).collect();
    Ok(&d.schur_q * CMat::diag(&fd) * d.schur_q.adjoint())
}

/// Argument in (0, 2π]: branch cut along the ray through 1.
pub fn arg_cut_at_one(z: C64) -> f64 {
    let a = z.arg();
    if a <= 0.0 {
        a + 2.0 * PI
    } else {
        a
    }
}

/// `h = −i·log(v)` for unitary `v` with the branch cut at 1, so σ(h) ⊂ (0, 2π].
pub fn unitary_log_hermitian(v: &CMat) -> Result<CMat> {
    let h = normal_function(v, |z| c(arg_cut_at_one(z), 0.0))?;
    Ok(h.hermitian_part())
}

/// Unitary polar factor `A(A*A)^{-1/2}` of an invertible square matrix.
pub fn polar_unitary(a: &CMat) -> Result<CMat> {
    let g = a.adjoint_mul(a);
    let inv_sqrt = hermitian_function(&g, |x| c(1.0 / x.max(f64::MIN_POSITIVE).sqrt(), 0.0))?;
    Ok(a * inv_sqrt)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::matrix::I;

    #[test]
    fn exp_of_zero_and_ipi() {
        assert!(matrix_exp(&CMat::zeros(3, 3)).dist(&CMat::identity(3)) < 1e-15);
        let a = CMat::identity(2).scale(I * PI);
        assert!(matrix_exp(&a).dist(&CMat::identity(2).scale_re(-1.0)) < 1e-13);
    }

    #[test]
    fn exp_nilpotent() {
        let a = CMat::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]);
        let e = matrix_exp(&a);
        assert!(e.dist(&CMat::from_real_rows(&[&[1.0, 1.0], &[0.0, 1.0]])) < 1e-15);
    }

    #[test]
    fn unitary_log_of_minus_identity() {
        let h = unitary_log_hermitian(&CMat::identity(2).scale_re(-1.0)).unwrap();
        assert!(h.dist(&CMat::identity(2).scale_re(PI)) < 1e-13);
    }
}

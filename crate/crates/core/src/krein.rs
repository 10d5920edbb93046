//! Krein structures, membership predicates, general-form reduction and
//! random members.

use serde::{Deserialize, Serialize};

use crate::error::{KreinError, Result};
use crate::numerics::{hermitian_function, herm_eig, matrix_exp, r, CMat, I};
use crate::random;

/// Fundamental symmetry `J = diag(1_{N₊}, −1_{N₋})`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct KreinStructure {
    pub n_plus: usize,
    pub n_minus: usize,
}

impl KreinStructure {
    pub fn dim(&self) -> usize {
        self.n_plus + self.n_minus
    }

    pub fn j(&self) -> CMat {
        j_matrix(self.n_plus, self.n_minus)
    }

    /// Diagonal entries of J as ±1.
    pub fn signs(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| if i < self.n_plus { 1.0 } else { -1.0 }).collect()
    }

    /// `J·A` by row scaling.
    pub fn left(&self, a: &CMat) -> CMat {
        let s = self.signs();
        CMat::from_fn(a.rows(), a.cols(), |i, j| a[(i, j)] * s[i])
    }

    /// `A·J` by column scaling.
    pub fn right(&self, a: &CMat) -> CMat {
        let s = self.signs();
        CMat::from_fn(a.rows(), a.cols(), |i, j| a[(i, j)] * s[j])
    }

    /// Inertia of J as a signed count N₊ − N₋.
    pub fn signature(&self) -> i64 {
        self.n_plus as i64 - self.n_minus as i64
    }
}

fn j_matrix(n_plus: usize, n_minus: usize) -> CMat {
    let d: Vec<f64> = (0..n_plus + n_minus).map(|i| if i < n_plus { 1.0 } else { -1.0 }).collect();
    CMat::real_diag(&d)
}

pub fn make_standard(n_plus: usize, n_minus: usize) -> KreinStructure {
    assert!(n_plus + n_minus >= 1, "Krein space must be non-trivial");
    KreinStructure { n_plus, n_minus }
}

/// Result of reducing a general invertible hermitian form `j`.
#[derive(Debug, Clone)]
pub struct GeneralFormReduction {
    pub structure: KreinStructure,
    /// `W = U·|j|^{1/2}` with U the permutation-to-standard-order basis change,
    /// so that `j = W*·J·W`.
    pub w: CMat,
    pub w_inv: CMat,
    /// `j|j|^{-1}` in the original basis.
    pub sign: CMat,
}

impl GeneralFormReduction {
    /// Maps a j-unitary (or j-hermitian) to its J-counterpart `W·T·W⁻¹`.
    pub fn conjugate(&self, t: &CMat) -> CMat {
        &self.w * t * &self.w_inv
    }
}

/// Reduces a general form `j` to the standard `J`.
///
/// With `j = V·D·V*`, set `W = P·|D|^{1/2}·V*` where `P` orders positive
/// eigen-directions first; then `W*·J·W = j` and `W·T·W⁻¹` is J-unitary
/// whenever `T` is j-unitary.
pub fn reduce_general_form(j: &CMat) -> Result<GeneralFormReduction> {
    if !j.is_square() {
        return Err(KreinError::DimensionMismatch { expected: "square".into(), got: format!("{}x{}", j.rows(), j.cols()) });
    }
    let (d, v) = herm_eig(j)?;
    let nrm = j.norm();
    let min_abs = d.iter().fold(f64::INFINITY, |a, &x| a.min(x.abs()));
    if min_abs <= 1e-10 * nrm {
        return Err(KreinError::SingularForm { min_abs });
    }
    let n = d.len();
    // order: positive eigenvalues first (descending index keeps ascending ones last)
    let mut order: Vec<usize> = (0..n).filter(|&k| d[k] > 0.0).collect();
    let n_plus = order.len();
    order.extend((0..n).filter(|&k| d[k] < 0.0));
    let n_minus = n - n_plus;
    let vo = v.select_cols(&order);
    let sq: Vec<f64> = order.iter().map(|&k| d[k].abs().sqrt()).collect();
    let w = CMat::real_diag(&sq) * vo.adjoint();
    let inv_sq: Vec<f64> = sq.iter().map(|x| 1.0 / x).collect();
    let w_inv = &vo * CMat::real_diag(&inv_sq);
    let sign = hermitian_function(j, |x| r(x.signum()))?;
    Ok(GeneralFormReduction { structure: make_standard(n_plus, n_minus), w, w_inv, sign })
}

fn check_dims(a: &CMat, k: &KreinStructure) -> Result<()> {
    if !a.is_square() || a.rows() != k.dim() {
        return Err(KreinError::DimensionMismatch {
            expected: format!("{0}x{0}", k.dim()),
            got: format!("{}x{}", a.rows(), a.cols()),
        });
    }
    Ok(())
}

/// Residual ‖T*JT − J‖ and whether it is within `tol`.
pub fn is_j_unitary(t: &CMat, k: &KreinStructure, tol: f64) -> Result<(bool, f64)> {
    check_dims(t, k)?;
    let res = (t.adjoint() * k.left(t) - k.j()).norm();
    Ok((res <= tol, res))
}

/// Residual ‖H*J − JH‖ and whether it is within `tol`.
pub fn is_j_hermitian(h: &CMat, k: &KreinStructure, tol: f64) -> Result<(bool, f64)> {
    check_dims(h, k)?;
    let res = (k.right(&h.adjoint()) - k.left(h)).norm();
    Ok((res <= tol, res))
}

/// `H = J·A` with `A` a random hermitian matrix.
pub fn random_j_hermitian(k: &KreinStructure, seed: u64) -> CMat {
    let mut g = random::rng(seed);
    let a = random::hermitian(&mut g, k.dim());
    k.left(&a)
}

/// `T = exp(iH)` for a random J-hermitian `H`.
pub fn random_j_unitary(k: &KreinStructure, seed: u64) -> CMat {
    matrix_exp(&random_j_hermitian(k, seed).scale(I))
}

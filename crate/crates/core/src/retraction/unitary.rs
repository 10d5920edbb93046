//! Unitary symmetry classes, logarithms with a movable branch cut and the
//! factorizations v = wᵗw, v = s*wᵗsw.

use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{KreinError, Result};
use crate::numerics::{c, eigenvalues, matrix_exp, normal_function, polar_unitary, unitary_log_hermitian, CMat, C64};
use crate::random::{complex_gaussian, rng};
use crate::realsym::{block_s, small_s};

/// Classes accepted by [`factorize_unitary`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum UnitaryClass {
    Symmetric,
    OddSymmetric,
}

/// Symmetry class of a unitary block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MatrixClass {
    Complex,
    Real,
    Quaternionic,
    Symmetric,
    Antisymmetric,
    /// sᵀvᵀs = v with s = [[0, −1], [1, 0]] blockwise.
    OddSymmetric,
}

impl MatrixClass {
    pub fn as_str(&self) -> &'static str {
        match self {
            MatrixClass::Complex => "complex",
            MatrixClass::Real => "real",
            MatrixClass::Quaternionic => "quaternionic",
            MatrixClass::Symmetric => "symmetric",
            MatrixClass::Antisymmetric => "antisymmetric",
            MatrixClass::OddSymmetric => "odd-symmetric",
        }
    }
}

/// `block_s(n/2)`; `n` must be even.
pub fn odd_s(n: usize) -> Result<CMat> {
    if n % 2 != 0 {
        return Err(KreinError::OddDimension { dim: n });
    }
    Ok(block_s(n / 2))
}

/// `1_{n/2} ⊗ s`, the quaternionic structure of the normal form of kind (−1,1).
pub fn quaternionic_s(n: usize) -> Result<CMat> {
    if n % 2 != 0 {
        return Err(KreinError::OddDimension { dim: n });
    }
    Ok(CMat::identity(n / 2).kron(&small_s()))
}

fn odd_reflect(a: &CMat, s: &CMat) -> CMat {
    s.transpose() * a.transpose() * s
}

fn quat_reflect(a: &CMat, s: &CMat) -> CMat {
    s.transpose() * a.conj() * s
}

/// Distance of `a` from its class (0 for [`MatrixClass::Complex`]).
pub fn class_residual(a: &CMat, class: MatrixClass) -> Result<f64> {
    Ok(match class {
        MatrixClass::Complex => 0.0,
        MatrixClass::Real => (a - &a.conj()).norm() * 0.5,
        MatrixClass::Quaternionic => (quat_reflect(a, &quaternionic_s(a.rows())?) - a).norm(),
        MatrixClass::Symmetric => (a.transpose() - a).norm(),
        MatrixClass::Antisymmetric => (a.transpose() + a).norm(),
        MatrixClass::OddSymmetric => (odd_reflect(a, &odd_s(a.rows())?) - a).norm(),
    })
}

/// Nearest element of the class in the linear sense (average with the reflection).
pub fn class_projection(a: &CMat, class: MatrixClass) -> Result<CMat> {
    Ok(match class {
        MatrixClass::Complex => a.clone(),
        MatrixClass::Real => a.map(|z| c(z.re, 0.0)),
        MatrixClass::Quaternionic => (a + &quat_reflect(a, &quaternionic_s(a.rows())?)).scale_re(0.5),
        MatrixClass::Symmetric => (a + &a.transpose()).scale_re(0.5),
        MatrixClass::Antisymmetric => (a - &a.transpose()).scale_re(0.5),
        MatrixClass::OddSymmetric => (a + &odd_reflect(a, &odd_s(a.rows())?)).scale_re(0.5),
    })
}

/// Projection of a hermitian `h` so that `exp(ih)` lies in `class`.
pub(crate) fn generator_projection(h: &CMat, class: MatrixClass) -> Result<CMat> {
    let out = match class {
        MatrixClass::Complex => h.clone(),
        MatrixClass::Real => h.map(|z| c(0.0, z.im)),
        MatrixClass::Quaternionic => (h - &quat_reflect(h, &quaternionic_s(h.rows())?)).scale_re(0.5),
        MatrixClass::Symmetric => (h + &h.transpose()).scale_re(0.5),
        MatrixClass::OddSymmetric => (h + &odd_reflect(h, &odd_s(h.rows())?)).scale_re(0.5),
        MatrixClass::Antisymmetric => return Err(KreinError::InvalidInput("no generator class for antisymmetric unitaries".into())),
    };
    Ok(out.hermitian_part())
}

pub fn unitarity_residual(v: &CMat) -> f64 {
    (v.adjoint_mul(v) - CMat::identity(v.cols())).norm()
}

/// Smallest distance from 1 to σ(v).
pub fn gap_to_one(v: &CMat) -> Result<f64> {
    Ok(eigenvalues(v)?.iter().map(|z| (z - 1.0).norm()).fold(f64::INFINITY, f64::min))
}

/// `h = −i·log(v)` with σ(h) ⊂ (cut − 2π, cut].
pub fn log_with_cut(v: &CMat, cut: f64) -> Result<CMat> {
    let h = normal_function(v, |z| {
        let mut a = z.arg();
        while a <= cut - 2.0 * PI {
            a += 2.0 * PI;
        }
        while a > cut {
            a -= 2.0 * PI;
        }
        c(a, 0.0)
    })?;
    Ok(h.hermitian_part())
}

/// Argument in the middle of the widest gap between eigenvalue arguments.
pub(crate) fn largest_gap_cut(eigs: &[C64]) -> f64 {
    if eigs.is_empty() {
        return 0.0;
    }
    let mut args: Vec<f64> = eigs.iter().map(|z| z.arg()).collect();
    args.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut best = (args[0] + 2.0 * PI - args[args.len() - 1], args[args.len() - 1]);
    for w in args.windows(2) {
        if w[1] - w[0] > best.0 {
            best = (w[1] - w[0], w[0]);
        }
    }
    best.1 + 0.5 * best.0
}

/// Logarithm with the branch cut through the widest spectral gap, so that
/// clustered eigenvalues are never split by the cut.
pub fn log_largest_gap(v: &CMat) -> Result<CMat> {
    log_with_cut(v, largest_gap_cut(&eigenvalues(v)?))
}

fn check_class(v: &CMat, class: UnitaryClass) -> Result<()> {
    let cls = match class {
        UnitaryClass::Symmetric => MatrixClass::Symmetric,
        UnitaryClass::OddSymmetric => MatrixClass::OddSymmetric,
    };
    let res = unitarity_residual(v).max(class_residual(v, cls)?);
    if !(res <= 1e-9) {
        return Err(KreinError::NotInClass { residual: res });
    }
    Ok(())
}

fn factor_from_log(h: &CMat, class: UnitaryClass) -> Result<CMat> {
    let half = |h: &CMat| matrix_exp(&h.scale(c(0.0, 0.5)));
    Ok(match class {
        UnitaryClass::Symmetric => half(&generator_projection(h, MatrixClass::Symmetric)?),
        UnitaryClass::OddSymmetric => {
            let s = odd_s(h.rows())?;
            s * half(&generator_projection(h, MatrixClass::OddSymmetric)?)
        }
    })
}

/// Factorization `v = wᵗw` (symmetric) or `v = s*wᵗsw` (odd-symmetric) with
/// the logarithm cut at 1. Requires 1 ∉ σ(v).
pub fn factorize_unitary(v: &CMat, class: UnitaryClass) -> Result<CMat> {
    check_class(v, class)?;
    let gap = gap_to_one(v)?;
    if !(gap > 1e-8) {
        return Err(KreinError::NotGapped { distance: gap });
    }
    factor_from_log(&unitary_log_hermitian(v)?, class)
}

/// Same factorization without the gap requirement (cut through the widest gap).
pub fn factorize_unitary_any(v: &CMat, class: UnitaryClass) -> Result<CMat> {
    check_class(v, class)?;
    factor_from_log(&log_largest_gap(v)?, class)
}

/// ‖wᵗw − v‖ or ‖s*wᵗsw − v‖.
pub fn factorization_residual(v: &CMat, w: &CMat, class: UnitaryClass) -> Result<f64> {
    let prod = match class {
        UnitaryClass::Symmetric => w.transpose() * w,
        UnitaryClass::OddSymmetric => {
            let s = odd_s(w.rows())?;
            s.adjoint() * w.transpose() * &s * w
        }
    };
    Ok((prod - v).norm())
}

pub type UnitaryPath = Arc<dyn Fn(f64) -> CMat + Send + Sync>;

/// Path inside the class from `u` (t = 0) to the class model (t = 1).
pub struct ModelPath {
    pub model: CMat,
    pub path: UnitaryPath,
}

fn exp_i(h: &CMat, s: f64) -> CMat {
    matrix_exp(&h.scale(c(0.0, s)))
}

/// Fixed generic skew-hermitian generator of the class (real or quaternionic).
fn class_generator(n: usize, class: MatrixClass) -> Result<CMat> {
    let mut g = rng(0x5eed_0f_c1a55);
    let x = complex_gaussian(&mut g, n, n);
    let h = (&x + &x.adjoint()).scale_re(0.5);
    generator_projection(&h, class)
}

fn det_sign(u: &CMat) -> Result<f64> {
    let det: C64 = eigenvalues(u)?.iter().product();
    Ok(if det.re < 0.0 { -1.0 } else { 1.0 })
}

/// Class model and a path of class members from `u` to it.
///
/// Models: 1 (complex, symmetric, quaternionic), block s (antisymmetric),
/// diag(1, …, 1, det u) (real orthogonal). Real and quaternionic unitaries
/// are first rotated away from −1 so that the principal logarithm stays in
/// the class.
pub fn model_path(u: &CMat, class: MatrixClass) -> Result<ModelPath> {
    let n = u.rows();
    match class {
        MatrixClass::Complex | MatrixClass::Symmetric | MatrixClass::OddSymmetric => {
            let h = generator_projection(&log_largest_gap(u)?, class)?;
            let path: UnitaryPath = Arc::new(move |t| exp_i(&h, 1.0 - t));
            Ok(ModelPath { model: CMat::identity(n), path })
        }
        MatrixClass::Antisymmetric => {
            let s = odd_s(n)?;
            let g = s.transpose() * u;
            let h = generator_projection(&log_largest_gap(&g)?, MatrixClass::OddSymmetric)?;
            let s2 = s.clone();
            let path: UnitaryPath = Arc::new(move |t| &s2 * exp_i(&h, 1.0 - t));
            Ok(ModelPath { model: s, path })
        }
        MatrixClass::Real | MatrixClass::Quaternionic => {
            let d = if class == MatrixClass::Real {
                let mut d = CMat::identity(n);
                if n > 0 {
                    d[(n - 1, n - 1)] = c(det_sign(u)?, 0.0);
                }
                d
            } else {
                CMat::identity(n)
            };
            let g = u * &d;
            let x0 = class_generator(n, class)?;
            let mut best = (f64::NEG_INFINITY, 0.0);
            for k in 0..64 {
                let alpha = 2.0 * PI * k as f64 / 64.0;
                let gr = &g * exp_i(&x0, alpha);
                let dist = eigenvalues(&gr)?.iter().map(|z| (z + 1.0).norm()).fold(f64::INFINITY, f64::min);
                if dist > best.0 {
                    best = (dist, alpha);
                }
                if dist >= 0.1 {
                    break;
                }
            }
            let alpha = best.1;
            let gr = polar_unitary(&class_projection(&(&g * exp_i(&x0, alpha)), class)?)?;
            let h = generator_projection(&log_with_cut(&gr, PI)?, class)?;
            let d2 = d.clone();
            let path: UnitaryPath = Arc::new(move |t| {
                if t <= 0.5 {
                    &g * exp_i(&x0, 2.0 * t * alpha) * &d2
                } else {
                    exp_i(&h, 2.0 - 2.0 * t) * &d2
                }
            });
            Ok(ModelPath { model: d, path })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::I;
    use crate::random::{hermitian, unitary};

    #[test]
    fn identity_factorizes_to_identity() {
        // 1 is not gapped from 1; the cut-independent variant gives w = 1
        let v = CMat::identity(3);
        assert!(matches!(factorize_unitary(&v, UnitaryClass::Symmetric), Err(KreinError::NotGapped { .. })));
        let w = factorize_unitary_any(&v, UnitaryClass::Symmetric).unwrap();
        assert!(w.dist(&CMat::identity(3)) < 1e-12);
    }

    #[test]
    fn diagonal_phases_halve() {
        let th = [0.7, 4.0];
        let v = CMat::diag(&th.map(|t| C64::from_polar(1.0, t)));
        let w = factorize_unitary(&v, UnitaryClass::Symmetric).unwrap();
        let want = CMat::diag(&th.map(|t| C64::from_polar(1.0, t / 2.0)));
        assert!(w.dist(&want) < 1e-12, "{w:?}");
    }

    #[test]
    fn random_symmetric_and_odd() {
        for seed in 0..10 {
            let mut g = rng(seed);
            let u = unitary(&mut g, 6);
            let v = u.transpose() * &u;
            let w = factorize_unitary(&v, UnitaryClass::Symmetric).unwrap();
            assert!(factorization_residual(&v, &w, UnitaryClass::Symmetric).unwrap() <= 1e-9);
            let s = odd_s(6).unwrap();
            let v = s.adjoint() * u.transpose() * &s * &u;
            let w = factorize_unitary(&v, UnitaryClass::OddSymmetric).unwrap();
            assert!(factorization_residual(&v, &w, UnitaryClass::OddSymmetric).unwrap() <= 1e-9);
        }
    }

    #[test]
    fn wrong_class_rejected() {
        let mut g = rng(3);
        let u = unitary(&mut g, 4);
        assert!(matches!(factorize_unitary(&u, UnitaryClass::Symmetric), Err(KreinError::NotInClass { .. })));
    }

    #[test]
    fn log_cut_windows() {
        let mut g = rng(5);
        let u = matrix_exp(&hermitian(&mut g, 4).scale(I));
        for cut in [-PI, 0.0, 1.0] {
            let h = log_with_cut(&u, cut).unwrap();
            assert!(exp_i(&h, 1.0).dist(&u) < 1e-10);
        }
    }

    #[test]
    fn model_paths_stay_in_class() {
        let mut g = rng(9);
        let x = complex_gaussian(&mut g, 4, 4);
        let real = polar_unitary(&x.map(|z| c(z.re, 0.0))).unwrap();
        let sym = {
            let u = unitary(&mut g, 4);
            u.transpose() * u
        };
        let s = odd_s(4).unwrap();
        let anti = {
            let u = unitary(&mut g, 4);
            u.transpose() * &s * u
        };
        let quat = matrix_exp(&class_generator(4, MatrixClass::Quaternionic).unwrap().scale(c(0.0, 3.0)));
        for (u, cls) in [(real, MatrixClass::Real), (sym, MatrixClass::Symmetric), (anti, MatrixClass::Antisymmetric), (quat, MatrixClass::Quaternionic)] {
            assert!(class_residual(&u, cls).unwrap() < 1e-10, "{cls:?}");
            let mp = model_path(&u, cls).unwrap();
            assert!((mp.path)(0.0).dist(&u) < 1e-9, "{cls:?}");
            assert!((mp.path)(1.0).dist(&mp.model) < 1e-9, "{cls:?}");
            for k in 0..=16 {
                let ut = (mp.path)(k as f64 / 16.0);
                assert!(class_residual(&ut, cls).unwrap() < 1e-8, "{cls:?} t = {k}/16");
                assert!(unitarity_residual(&ut) < 1e-9);
            }
        }
    }
}

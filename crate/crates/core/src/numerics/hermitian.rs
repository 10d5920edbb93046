//! Jacobi methods: hermitian eigendecomposition and one-sided SVD.

use super::matrix::{CMat, C64, ZERO};
use crate::error::{KreinError, Result};

/// Applies the column rotation `[x_p, x_q] ← [x_p, x_q]·[[c, s], [−s·e, c·e]]`
/// with `e = e^{−iφ}`.
fn rotate_cols(m: &mut CMat, p: usize, q: usize, cs: f64, sn: f64, e: C64) {
    for i in 0..m.rows() {
        let x = m[(i, p)];
        let y = m[(i, q)];
        m[(i, p)] = x * cs - y * e * sn;
        m[(i, q)] = x * sn + y * e * cs;
    }
}

/// Applies the adjoint of the same rotation to rows p, q.
fn rotate_rows_adj(m: &mut CMat, p: usize, q: usize, cs: f64, sn: f64, e: C64) {
    let ec = e.conj();
    for j in 0..m.cols() {
        let x = m[(p, j)];
        let y = m[(q, j)];
        m[(p, j)] = x * cs - y * ec * sn;
        m[(q, j)] = x * sn + y * ec * cs;
    }
}

fn jacobi_angle(app: f64, aqq: f64, apq_abs: f64) -> (f64, f64) {
    let theta = (aqq - app) / (2.0 * apq_abs);
    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
    let t = if theta == 0.0 { 1.0 } else { t };
    let cs = 1.0 / (t * t + 1.0).sqrt();
    (cs, t * cs)
}

/// Hermitian eigendecomposition: ascending real eigenvalues, orthonormal
/// eigenvector columns.
pub fn herm_eig(a: &CMat) -> Result<(Vec<f64>, CMat)> {
    herm_eig_with(a, 1e-10)
}

pub fn herm_eig_with(a: &CMat, hermitian_rel: f64) -> Result<(Vec<f64>, CMat)> {
    if !a.is_square() {
        return Err(KreinError::DimensionMismatch {
            expected: "square matrix".into(),
            got: format!("{}x{}", a.rows(), a.cols()),
        });
    }
    let n = a.rows();
    let nrm = a.norm();
    let residual = (a - &a.adjoint()).norm();
    if residual > hermitian_rel * nrm {
        return Err(KreinError::NotHermitian { residual });
    }
    let mut m = a.hermitian_part();
    let mut v = CMat::identity(n);
    if n == 0 {
        return Ok((vec![], v));
    }
    let target = 1e-16 * nrm.max(f64::MIN_POSITIVE);
    for _sweep in 0..100 {
        let mut off = 0.0;
        for p in 0..n {
            for q in p + 1..n {
                off += m[(p, q)].norm_sqr();
            }
        }
        if off.sqrt() <= target {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[(p, q)];
                let abs = apq.norm();
                if abs <= 1e-300 {
                    continue;
                }
                // U = diag(1, e^{-iφ})·[[c, s], [-s, c]], φ = arg(a_pq)
                let e_minus = (apq / abs).conj();
                let (cs, sn) = jacobi_angle(m[(p, p)].re, m[(q, q)].re, abs);
                rotate_cols(&mut m, p, q, cs, sn, e_minus);
                rotate_rows_adj(&mut m, p, q, cs, sn, e_minus);
                rotate_cols(&mut v, p, q, cs, sn, e_minus);
                m[(p, q)] = ZERO;
                m[(q, p)] = ZERO;
            }
        }
    }
    let mut idx: Vec<usize> = (0..n).collect();
    let d: Vec<f64> = (0..n).map(|i| m[(i, i)].re).collect();
    idx.sort_by(|&i, &j| d[i].partial_cmp(&d[j]).unwrap());
    let evals = idx.iter().map(|&i| d[i]).collect();
    Ok((evals, v.select_cols(&idx)))
}

/// Thin singular value decomposition `A = U·diag(σ)·V*`, σ descending.
///
/// `U` is m×k and `V` is n×k with k = min(m, n).
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: CMat,
    pub sigma: Vec<f64>,
    pub v: CMat,
}

pub fn svd(a: &CMat) -> Svd {
    if a.rows() < a.cols() {
        let s = svd(&a.adjoint());
        return Svd { u: s.v, sigma: s.sigma, v: s.u };
    }
    let (m, n) = (a.rows(), a.cols());
    let mut u = a.clone();
    let mut v = CMat::identity(n);
    for _sweep in 0..80 {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let mut alpha = 0.0;
                let mut beta = 0.0;
                let mut gamma = ZERO;
                for i in 0..m {
                    alpha += u[(i, p)].norm_sqr();
                    beta += u[(i, q)].norm_sqr();
                    gamma += u[(i, p)].conj() * u[(i, q)];
                }
                let g = gamma.norm();
                if g <= 1e-15 * (alpha * beta).sqrt() || g == 0.0 {
                    continue;
                }
                rotated = true;
                let e_minus = (gamma / g).conj();
                let zeta = (beta - alpha) / (2.0 * g);
                let t = if zeta == 0.0 { 1.0 } else { zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt()) };
                let cs = 1.0 / (1.0 + t * t).sqrt();
                let sn = cs * t;
                rotate_cols(&mut u, p, q, cs, sn, e_minus);
                rotate_cols(&mut v, p, q, cs, sn, e_minus);
            }
        }
        if !rotated {
            break;
        }
    }
    let norms: Vec<f64> = (0..n).map(|j| (0..m).map(|i| u[(i, j)].norm_sqr()).sum::<f64>().sqrt()).collect();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&i, &j| norms[j].partial_cmp(&norms[i]).unwrap());
    let sigma: Vec<f64> = idx.iter().map(|&j| norms[j]).collect();
    let mut uu = u.select_cols(&idx);
    for (k, &s) in sigma.iter().enumerate() {
        if s > 0.0 {
            for i in 0..m {
                uu[(i, k)] /= s;
            }
        }
    }
    Svd { u: uu, sigma, v: v.select_cols(&idx) }
}

pub fn singular_values(a: &CMat) -> Vec<f64> {
    svd(a).sigma
}

/// Numerical rank: singular values above `rank_tol·max(σ_max, floor)`.
pub fn rank(a: &CMat, rank_tol: f64) -> usize {
    let s = singular_values(a);
    let smax = s.first().copied().unwrap_or(0.0);
    s.iter().filter(|&&x| x > rank_tol * smax && x > 0.0).count()
}

/// Orthonormal basis of the numerical column space.
///
/// Singular values at or below `rank_tol·σ_max` are treated as zero, so the
/// threshold is relative to the scale of `A`.
pub fn orthonormal_frame(a: &CMat, rank_tol: f64) -> CMat {
    if a.cols() == 0 || a.rows() == 0 {
        return CMat::zeros(a.rows(), 0);
    }
    let s = svd(a);
    let smax = s.sigma.first().copied().unwrap_or(0.0);
    let k = s.sigma.iter().filter(|&&x| x > rank_tol * smax && x > 0.0).count();
    let idx: Vec<usize> = (0..k).collect();
    let mut frame = s.u.select_cols(&idx);
    // re-orthonormalize against accumulated rounding
    reorthonormalize(&mut frame);
    frame
}

/// Orthonormal basis of the orthogonal complement of range(frame), where
/// `frame` has orthonormal columns.
pub fn complement_frame(frame: &CMat) -> CMat {
    let n = frame.rows();
    if frame.cols() == 0 {
        return CMat::identity(n);
    }
    if frame.cols() >= n {
        return CMat::zeros(n, 0);
    }
    let proj = CMat::identity(n) - frame * frame.adjoint();
    let s = svd(&proj);
    let k = s.sigma.iter().filter(|&&x| x > 0.5).count();
    let idx: Vec<usize> = (0..k).collect();
    let mut f = s.u.select_cols(&idx);
    reorthonormalize(&mut f);
    f
}

/// Orthonormal basis of the numerical kernel, relative threshold `tol`
/// against max(σ_max, `scale`).
pub fn null_space(a: &CMat, tol: f64, scale: f64) -> CMat {
    let s = svd(a);
    let smax = s.sigma.first().copied().unwrap_or(0.0).max(scale);
    let thresh = tol * smax;
    let rank_cols: Vec<usize> = (0..s.sigma.len()).filter(|&k| s.sigma[k] > thresh).collect();
    let row_space = s.v.select_cols(&rank_cols);
    complement_frame(&row_space)
}

/// Modified Gram–Schmidt pass (twice) in place.
pub fn reorthonormalize(f: &mut CMat) {
    let (m, k) = (f.rows(), f.cols());
    for _ in 0..2 {
        for j in 0..k {
            for p in 0..j {
                let mut d = ZERO;
                for i in 0..m {
                    d += f[(i, p)].conj() * f[(i, j)];
                }
                for i in 0..m {
                    let fp = f[(i, p)];
                    f[(i, j)] -= fp * d;
                }
            }
            let nrm = (0..m).map(|i| f[(i, j)].norm_sqr()).sum::<f64>().sqrt();
            if nrm > 0.0 {
                for i in 0..m {
                    f[(i, j)] /= nrm;
                }
            }
        }
    }
}

/// Inertia counts (positive, negative, |λ| ≤ zero_tol) of a hermitian matrix.
pub fn sylvester_inertia(a: &CMat, zero_tol: f64) -> Result<(usize, usize, usize)> {
    let (d, _) = herm_eig(a)?;
    let pos = d.iter().filter(|&&x| x > zero_tol).count();
    let neg = d.iter().filter(|&&x| x < -zero_tol).count();
    Ok((pos, neg, d.len() - pos - neg))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::matrix::{c, r};

    #[test]
    fn herm_eig_diag_and_swap() {
        let (d, _) = herm_eig(&CMat::real_diag(&[1.0, -1.0])).unwrap();
        assert_eq!(d, vec![-1.0, 1.0]);
        let (d, v) = herm_eig(&CMat::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]])).unwrap();
        assert!((d[0] + 1.0).abs() < 1e-15 && (d[1] - 1.0).abs() < 1e-15);
        assert!((v.adjoint() * &v).dist(&CMat::identity(2)) < 1e-14);
    }

    #[test]
    fn herm_eig_complex_offdiag() {
        let a = CMat::from_rows(&[vec![r(2.0), c(0.0, 1.0)], vec![c(0.0, -1.0), r(2.0)]]);
        let (d, v) = herm_eig(&a).unwrap();
        assert!((d[0] - 1.0).abs() < 1e-14 && (d[1] - 3.0).abs() < 1e-14);
        let recon = &v * CMat::real_diag(&d) * v.adjoint();
        assert!(recon.dist(&a) < 1e-13);
    }

    #[test]
    fn herm_eig_rejects_nonhermitian() {
        let a = CMat::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]);
        assert!(matches!(herm_eig(&a), Err(KreinError::NotHermitian { .. })));
    }

    #[test]
    fn frame_of_rank_one_diag() {
        let f = orthonormal_frame(&CMat::real_diag(&[3.0, 0.0]), 1e-8);
        assert_eq!(f.cols(), 1);
        assert!((f[(0, 0)].norm() - 1.0).abs() < 1e-15);
        assert!(f[(1, 0)].norm() < 1e-15);
    }

    #[test]
    fn svd_wide_and_tall() {
        let a = CMat::from_fn(2, 3, |i, j| c(i as f64 + 1.0, (j as f64) - 0.5));
        let s = svd(&a);
        let recon = &s.u * CMat::real_diag(&s.sigma) * s.v.adjoint();
        assert!(recon.dist(&a) < 1e-13);
        let k = null_space(&a, 1e-10, 0.0);
        assert_eq!(k.cols(), 1);
        assert!((&a * &k).norm() < 1e-13);
    }
}

//! Preparation of kernel frames: normalizing the Real structure on the
//! frame and diagonalizing the form j = Ψ*JΨ inside the required class.

use crate::error::{KreinError, Result};
use crate::krein::KreinStructure;
use crate::numerics::{c, herm_eig, hermitian_function, CMat, C64, I};
use crate::realsym::{block_s, RealKind, RealStructure};

use super::unitary::{factorize_unitary_any, UnitaryClass};

const FRAME_TOL: f64 = 1e-8;

/// Frame Ψ with j = Ψ*JΨ in class-adapted diagonal form and the lift
/// matrix V (J_Ψ-hermitian, J_Ψ = j|j|⁻¹).
#[derive(Debug, Clone)]
pub(crate) struct PreparedFrame {
    pub psi: CMat,
    pub j: CMat,
    pub n: CMat,
    pub n_inv: CMat,
    pub v: CMat,
}

fn fail(msg: impl Into<String>) -> KreinError {
    KreinError::FramePreparationFailed(msg.into())
}

/// Cyclic Jacobi for a real symmetric matrix. Returns eigenvalues and
/// orthonormal eigenvectors (columns of the second value).
pub(crate) fn real_sym_eig(a: &[Vec<f64>]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = a.len();
    let mut a: Vec<Vec<f64>> = a.to_vec();
    let mut v: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect();
    let scale = a.iter().flatten().map(|x| x * x).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
    for _sweep in 0..100 {
        let off: f64 = (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).map(|(i, j)| a[i][j] * a[i][j]).sum::<f64>().sqrt();
        if off <= 1e-15 * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q].abs() <= 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let cs = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * cs;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = cs * akp - sn * akq;
                    a[k][q] = sn * akp + cs * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = cs * apk - sn * aqk;
                    a[q][k] = sn * apk + cs * aqk;
                }
                for row in v.iter_mut() {
                    let (vp, vq) = (row[p], row[q]);
                    row[p] = cs * vp - sn * vq;
                    row[q] = sn * vp + cs * vq;
                }
            }
        }
    }
    let d = (0..n).map(|i| a[i][i]).collect();
    let cols = (0..n).map(|j| (0..n).map(|i| v[i][j]).collect()).collect();
    (d, cols)
}

fn real_rows(a: &CMat) -> Vec<Vec<f64>> {
    (0..a.rows()).map(|i| (0..a.cols()).map(|j| a[(i, j)].re).collect()).collect()
}

fn cvec(x: &[f64]) -> Vec<C64> {
    x.iter().map(|&v| c(v, 0.0)).collect()
}

fn dot(x: &[C64], y: &[C64]) -> C64 {
    x.iter().zip(y).map(|(a, b)| a.conj() * b).sum()
}

fn vnorm(x: &[C64]) -> f64 {
    x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Orthogonalizes `x` against `basis` (twice) and normalizes; `None` when
/// little is left.
fn orthonormalize_against(x: &[C64], basis: &[Vec<C64>]) -> Option<Vec<C64>> {
    let mut y = x.to_vec();
    for _ in 0..2 {
        for b in basis {
            let p = dot(b, &y);
            for (yi, bi) in y.iter_mut().zip(b) {
                *yi -= p * bi;
            }
        }
    }
    let nr = vnorm(&y);
    if nr < 0.5 {
        return None;
    }
    Some(y.iter().map(|z| z / nr).collect())
}

/// Greedy Kramers pairing: picks candidates orthogonal to everything chosen
/// so far and pairs each with its image under `partner`. Returns the picked
/// vectors and their partners.
fn pair_greedily(candidates: &[Vec<C64>], partner: impl Fn(&[C64]) -> Vec<C64>, count: usize, chosen: &mut Vec<Vec<C64>>) -> Result<(Vec<Vec<C64>>, Vec<Vec<C64>>)> {
    let mut firsts = Vec::new();
    let mut seconds = Vec::new();
    for x in candidates {
        if firsts.len() == count {
            break;
        }
        if let Some(x) = orthonormalize_against(x, chosen) {
            let y = partner(&x);
            let ny = vnorm(&y);
            if (ny - 1.0).abs() > 1e-6 || dot(&x, &y).norm() > 1e-6 {
                return Err(fail("partner vector is not orthonormal to its pair"));
            }
            chosen.push(x.clone());
            chosen.push(y.clone());
            firsts.push(x);
            seconds.push(y);
        }
    }
    if firsts.len() != count {
        return Err(fail(format!("found {} of {} Kramers pairs", firsts.len(), count)));
    }
    Ok((firsts, seconds))
}

/// Map c ↦ s·c̄ on coordinate vectors with s = block_s(m/2).
fn s_conj(x: &[C64]) -> Vec<C64> {
    let h = x.len() / 2;
    (0..x.len()).map(|i| if i < h { -x[i + h].conj() } else { x[i - h].conj() }).collect()
}

/// V = [[0, 0, i1_m], [0, 0_{n0}, 0], [i1_m, 0, 0]] for J = diag(1_p, −1_q)
/// with m = min(p, q) and n0 = |p − q|.
pub(crate) fn pairing_v(p: usize, q: usize) -> CMat {
    let m = p.min(q);
    let n = p + q;
    let mut v = CMat::zeros(n, n);
    for k in 0..m {
        v[(k, n - m + k)] = I;
        v[(n - m + k, k)] = I;
    }
    v
}

/// Antisymmetric real B with B² = −1 on all but at most two coordinates:
/// block_s(m/2) for even m, [[0,0,−1],[0,0,0],[1,0,0]] (blocks ⌊m/2⌋, 1, ⌊m/2⌋) for odd m.
pub(crate) fn odd_pairing_b(m: usize) -> CMat {
    if m % 2 == 0 {
        return block_s(m / 2);
    }
    let h = m / 2;
    let mut b = CMat::zeros(m, m);
    for k in 0..h {
        b[(k, h + 1 + k)] = c(-1.0, 0.0);
        b[(h + 1 + k, k)] = c(1.0, 0.0);
    }
    b
}

fn sign_counts(d: &[f64]) -> Result<(usize, usize)> {
    if let Some(x) = d.iter().find(|x| x.abs() <= FRAME_TOL) {
        return Err(KreinError::DegenerateSubspace { min_abs: x.abs() });
    }
    Ok((d.iter().filter(|&&x| x > 0.0).count(), d.iter().filter(|&&x| x < 0.0).count()))
}

/// Eigenvectors ordered positives (descending) first, then negatives
/// (ascending |λ| last): returns (positive vectors, negative vectors).
fn split_by_sign(d: &[f64], vecs: Vec<Vec<C64>>) -> (Vec<Vec<C64>>, Vec<Vec<C64>>) {
    let mut idx: Vec<usize> = (0..d.len()).collect();
    idx.sort_by(|&a, &b| d[b].partial_cmp(&d[a]).unwrap());
    let pos = idx.iter().filter(|&&i| d[i] > 0.0).map(|&i| vecs[i].clone()).collect();
    let neg = idx.iter().rev().filter(|&&i| d[i] < 0.0).map(|&i| vecs[i].clone()).collect();
    (pos, neg)
}

/// Makes the Real structure canonical on the frame: SΨ̄ = Ψ (η = 1) or
/// SΨ̄ = −Ψ·block_s(m/2) (η = −1). Ψ must span an S-invariant subspace.
pub(crate) fn normalize_real_frame(psi: &CMat, rs: &RealStructure) -> Result<CMat> {
    let m = psi.cols();
    if m == 0 {
        return Ok(psi.clone());
    }
    let u = psi.adjoint() * &rs.s * psi.conj();
    let out = if rs.kind.eta == 1 {
        let u = (&u + &u.transpose()).scale_re(0.5);
        let w = factorize_unitary_any(&crate::numerics::polar_unitary(&u)?, UnitaryClass::Symmetric)?;
        psi * w.transpose()
    } else {
        if m % 2 != 0 {
            return Err(fail(format!("odd frame dimension {m} for η = −1")));
        }
        let u = (&u - &u.transpose()).scale_re(0.5);
        let s = block_s(m / 2);
        let v = crate::numerics::polar_unitary(&(s.transpose() * &u))?;
        let v = (&v + &(s.transpose() * v.transpose() * &s)).scale_re(0.5);
        let w = factorize_unitary_any(&crate::numerics::polar_unitary(&v)?, UnitaryClass::OddSymmetric)?;
        psi * w.transpose().scale(I)
    };
    let res = real_frame_residual(&out, rs);
    if !(res <= FRAME_TOL) {
        return Err(fail(format!("Real normalization residual {res:.3e}")));
    }
    Ok(out)
}

pub(crate) fn real_frame_residual(psi: &CMat, rs: &RealStructure) -> f64 {
    let lhs = &rs.s * psi.conj();
    if rs.kind.eta == 1 {
        (lhs - psi).norm()
    } else {
        (lhs + psi * block_s(psi.cols() / 2)).norm()
    }
}

/// Rotation Q of the coordinates in which j becomes class-adapted diagonal,
/// together with the lift matrix V in the new coordinates.
fn diagonalize(j: &CMat, kind: Option<RealKind>) -> Result<(CMat, CMat)> {
    let m = j.rows();
    let to_mat = |cols: &[Vec<C64>]| CMat::from_cols(m, cols);
    match kind.map(|k| (k.eta, k.tau)) {
        None => {
            let (d, u) = herm_eig(j)?;
            sign_counts(&d)?;
            let vecs: Vec<Vec<C64>> = (0..m).map(|k| u.col(k)).collect();
            let (pos, neg) = split_by_sign(&d, vecs);
            let (p, q) = (pos.len(), neg.len());
            Ok((to_mat(&[pos, neg].concat()), pairing_v(p, q)))
        }
        Some((1, 1)) => {
            let (d, vecs) = real_sym_eig(&real_rows(j));
            sign_counts(&d)?;
            let vecs: Vec<Vec<C64>> = vecs.iter().map(|x| cvec(x)).collect();
            let (pos, neg) = split_by_sign(&d, vecs);
            let (p, q) = (pos.len(), neg.len());
            Ok((to_mat(&[pos, neg].concat()), pairing_v(p, q)))
        }
        Some((1, -1)) => {
            // j = iK with K real antisymmetric
            let kmat: Vec<Vec<f64>> = (0..m).map(|a| (0..m).map(|b| j[(a, b)].im).collect()).collect();
            let ktk: Vec<Vec<f64>> = (0..m).map(|a| (0..m).map(|b| (0..m).map(|r| kmat[r][a] * kmat[r][b]).sum()).collect()).collect();
            let (d, vecs) = real_sym_eig(&ktk);
            if let Some(x) = d.iter().find(|x| x.sqrt() <= FRAME_TOL) {
                return Err(KreinError::DegenerateSubspace { min_abs: x.max(0.0).sqrt() });
            }
            if m % 2 != 0 {
                return Err(fail("odd kernel dimension for kind (1,-1)"));
            }
            let mut idx: Vec<usize> = (0..m).collect();
            idx.sort_by(|&a, &b| d[b].partial_cmp(&d[a]).unwrap());
            let cands: Vec<Vec<C64>> = idx.iter().map(|&i| cvec(&vecs[i])).collect();
            let apply_k = |x: &[C64]| -> Vec<C64> {
                let y: Vec<C64> = (0..m).map(|a| (0..m).map(|b| x[b] * kmat[a][b]).sum()).collect();
                let nr = vnorm(&y);
                y.iter().map(|z| z / nr).collect()
            };
            let mut chosen = Vec::new();
            let (xs, ys) = pair_greedily(&cands, apply_k, m / 2, &mut chosen)?;
            let h = m / 2;
            let mut v = CMat::zeros(m, m);
            for k in 0..h {
                v[(k, k)] = I;
                v[(h + k, h + k)] = -I;
            }
            Ok((to_mat(&[xs, ys].concat()), v))
        }
        Some((-1, tau)) => {
            if m % 2 != 0 {
                return Err(fail("odd kernel dimension for η = −1"));
            }
            let h = m / 2;
            let (d, u) = herm_eig(j)?;
            sign_counts(&d)?;
            let vecs: Vec<Vec<C64>> = (0..m).map(|k| u.col(k)).collect();
            let (pos, neg) = split_by_sign(&d, vecs);
            let mut chosen = Vec::new();
            if tau == 1 {
                // Kramers pairs share their sign
                if pos.len() % 2 != 0 {
                    return Err(fail("odd positive multiplicity for kind (-1,1)"));
                }
                let (xp, yp) = pair_greedily(&pos, s_conj, pos.len() / 2, &mut chosen)?;
                let (xn, yn) = pair_greedily(&neg, s_conj, neg.len() / 2, &mut chosen)?;
                let (p, q) = (xp.len(), xn.len());
                let vh = pairing_v(p, q);
                let v = CMat::block_diag(&vh, &vh);
                Ok((to_mat(&[xp, xn, yp, yn].concat()), v))
            } else {
                // partners carry the opposite sign
                if pos.len() != h {
                    return Err(fail("unbalanced form for kind (-1,-1)"));
                }
                let (xs, ys) = pair_greedily(&pos, s_conj, h, &mut chosen)?;
                let b = odd_pairing_b(h);
                let mut v = CMat::zeros(m, m);
                v.set_block(0, h, &b);
                v.set_block(h, 0, &b);
                Ok((to_mat(&[xs, ys].concat()), v))
            }
        }
        Some(_) => unreachable!("kind entries are ±1"),
    }
}

/// Full preparation of an orthonormal frame of a J-nondegenerate,
/// S-invariant (when `rs` is given) subspace.
pub(crate) fn prepare_frame(psi0: &CMat, k: &KreinStructure, rs: Option<&RealStructure>) -> Result<PreparedFrame> {
    let psi1 = match rs {
        Some(rs) => normalize_real_frame(psi0, rs)?,
        None => psi0.clone(),
    };
    let j1 = psi1.adjoint_mul(&k.left(&psi1)).hermitian_part();
    let (q, v) = diagonalize(&j1, rs.map(|r| r.kind))?;
    let psi = &psi1 * &q;
    if let Some(rs) = rs {
        let res = real_frame_residual(&psi, rs);
        if !(res <= FRAME_TOL) {
            return Err(fail(format!("Real structure lost in diagonalization: {res:.3e}")));
        }
    }
    let j = psi.adjoint_mul(&k.left(&psi)).hermitian_part();
    let n = hermitian_function(&j, |x| c(x.abs().powf(-0.5), 0.0))?;
    let n_inv = hermitian_function(&j, |x| c(x.abs().sqrt(), 0.0))?;
    let j_sign = hermitian_function(&j, |x| c(x.signum(), 0.0))?;
    let herm_res = (v.adjoint() * &j_sign - &j_sign * &v).norm();
    if !(herm_res <= FRAME_TOL) {
        return Err(fail(format!("lift matrix is not J_Ψ-hermitian: {herm_res:.3e}")));
    }
    Ok(PreparedFrame { psi, j, n, n_inv, v })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::krein::make_standard;
    use crate::numerics::ZERO;
    use crate::realsym::make_real_structure;

    #[test]
    fn jacobi_matches_closed_form() {
        let (mut d, _) = real_sym_eig(&[vec![2.0, 1.0], vec![1.0, 2.0]]);
        d.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!((d[0] - 1.0).abs() < 1e-14 && (d[1] - 3.0).abs() < 1e-14);
    }

    #[test]
    fn jacobi_reconstructs() {
        let a = vec![vec![1.0, 2.0, -0.5], vec![2.0, 0.3, 0.7], vec![-0.5, 0.7, -2.0]];
        let (d, v) = real_sym_eig(&a);
        for i in 0..3 {
            for j in 0..3 {
                let s: f64 = (0..3).map(|k| v[k][i] * d[k] * v[k][j]).sum();
                assert!((s - a[i][j]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn pairing_v_2x2() {
        let v = pairing_v(1, 1);
        assert!(v.dist(&CMat::from_rows(&[vec![ZERO, I], vec![I, ZERO]])) < 1e-15);
    }

    #[test]
    fn whole_space_frames_all_kinds() {
        for (kind, p, q) in [(RealKind::new(1, 1), 2, 1), (RealKind::new(1, -1), 2, 2), (RealKind::new(-1, 1), 2, 2), (RealKind::new(-1, -1), 2, 2), (RealKind::new(-1, -1), 3, 3)] {
            let rs = make_real_structure(kind, p, q).unwrap();
            let k = make_standard(p, q);
            let f = prepare_frame(&CMat::identity(p + q), &k, Some(&rs)).unwrap();
            assert!(real_frame_residual(&f.psi, &rs) < 1e-10, "{kind}");
            assert!(f.psi.adjoint_mul(&f.psi).dist(&CMat::identity(p + q)) < 1e-10);
        }
    }
}

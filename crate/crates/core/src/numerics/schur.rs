//! Complex Schur decomposition: Householder reduction to Hessenberg form
//! followed by single-shift QR with Givens rotations.

use super::matrix::{c, CMat, C64, ONE, ZERO};
use crate::error::{KreinError, Result};

/// `A = Q·T·Q*` with `Q` unitary and `T` upper triangular.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub eigenvalues: Vec<C64>,
    pub schur_q: CMat,
    pub schur_t: CMat,
}

impl EigenDecomposition {
    /// ‖A·Q − Q·T‖.
    pub fn reconstruction_residual(&self, a: &CMat) -> f64 {
        (a * &self.schur_q - &self.schur_q * &self.schur_t).norm()
    }
}

#[derive(Clone, Copy)]
struct Givens {
    c: f64,
    s: C64,
}

impl Givens {
    /// Rotation with `G·[a; b] = [r; 0]`, `G = [[c, s], [-s̄, c]]`.
    fn make(a: C64, b: C64) -> (Givens, C64) {
        if b == ZERO {
            return (Givens { c: 1.0, s: ZERO }, a);
        }
        if a == ZERO {
            let nb = b.norm();
            return (Givens { c: 0.0, s: b.conj() / nb }, c(nb, 0.0));
        }
        let na = a.norm();
        let nrm = na.hypot(b.norm());
        let phase = a / na;
        (Givens { c: na / nrm, s: phase * b.conj() / nrm }, phase * nrm)
    }

    fn apply_left(&self, m: &mut CMat, p: usize, q: usize, c0: usize, c1: usize) {
        for j in c0..c1 {
            let x = m[(p, j)];
            let y = m[(q, j)];
            m[(p, j)] = x * self.c + self.s * y;
            m[(q, j)] = -self.s.conj() * x + y * self.c;
        }
    }

    /// Multiplies columns p, q from the right by G*.
    fn apply_right_adj(&self, m: &mut CMat, p: usize, q: usize, r0: usize, r1: usize) {
        for i in r0..r1 {
            let x = m[(i, p)];
            let y = m[(i, q)];
            m[(i, p)] = x * self.c + y * self.s.conj();
            m[(i, q)] = -x * self.s + y * self.c;
        }
    }
}

fn hessenberg(a: &CMat) -> (CMat, CMat) {
    let n = a.rows();
    let mut h = a.clone();
    let mut q = CMat::identity(n);
    for k in 0..n.saturating_sub(2) {
        let x: Vec<C64> = (k + 1..n).map(|i| h[(i, k)]).collect();
        let xn = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if xn == 0.0 {
            continue;
        }
        let phase = if x[0].norm() > 0.0 { x[0] / x[0].norm() } else { ONE };
        let alpha = -phase * xn;
        let mut v = x.clone();
        v[0] -= alpha;
        let vn = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if vn == 0.0 {
            continue;
        }
        for z in v.iter_mut() {
            *z /= vn;
        }
        // H ← (I − 2vv*) H
        for j in 0..n {
            let mut s = ZERO;
            for (t, vi) in v.iter().enumerate() {
                s += vi.conj() * h[(k + 1 + t, j)];
            }
            for (t, vi) in v.iter().enumerate() {
                h[(k + 1 + t, j)] -= *vi * s * 2.0;
            }
        }
        // H ← H (I − 2vv*), Q ← Q (I − 2vv*)
        for m in [&mut h, &mut q] {
            for i in 0..n {
                let mut s = ZERO;
                for (t, vi) in v.iter().enumerate() {
                    s += m[(i, k + 1 + t)] * *vi;
                }
                for (t, vi) in v.iter().enumerate() {
                    m[(i, k + 1 + t)] -= s * vi.conj() * 2.0;
                }
            }
        }
        for i in k + 2..n {
            h[(i, k)] = ZERO;
        }
    }
    (h, q)
}

fn wilkinson_shift(t: &CMat, iu: usize, iter: usize) -> C64 {
    let a = t[(iu - 1, iu - 1)];
    let b = t[(iu - 1, iu)];
    let cc = t[(iu, iu - 1)];
    let d = t[(iu, iu)];
    if iter % 10 == 0 && iter > 0 {
        // exceptional shift to break cycles
        let base = d.norm() + cc.norm();
        return d + c(0.75 * base, 0.4375 * base);
    }
    let tr = (a + d) * 0.5;
    let disc = (((a - d) * 0.5) * ((a - d) * 0.5) + b * cc).sqrt();
    let m1 = tr + disc;
    let m2 = tr - disc;
    if (m1 - d).norm() < (m2 - d).norm() {
        m1
    } else {
        m2
    }
}

/// Eigenvalues with algebraic multiplicity via the complex Schur form.
pub fn eig(a: &CMat) -> Result<EigenDecomposition> {
    if !a.is_square() {
        return Err(KreinError::DimensionMismatch {
            expected: "square matrix".into(),
            got: format!("{}x{}", a.rows(), a.cols()),
        });
    }
    let n = a.rows();
    if n == 0 {
        return Ok(EigenDecomposition { eigenvalues: vec![], schur_q: CMat::zeros(0, 0), schur_t: CMat::zeros(0, 0) });
    }
    let (mut t, mut q) = hessenberg(a);
    let eps = f64::EPSILON;
    let max_iter = 60 * n.max(1);
    let small = |t: &CMat, i: usize| -> bool {
        let s = t[(i, i - 1)].norm();
        s <= eps * (t[(i - 1, i - 1)].norm() + t[(i, i)].norm()) || s < f64::MIN_POSITIVE * 1e10
    };
    let mut iu = n - 1;
    let mut iter = 0;
    let mut total = 0;
    loop {
        while iu > 0 {
            if small(&t, iu) {
                t[(iu, iu - 1)] = ZERO;
                iu -= 1;
                iter = 0;
            } else {
                break;
            }
        }
        if iu == 0 {
            break;
        }
        iter += 1;
        total += 1;
        if total > max_iter {
            return Err(KreinError::NoConvergence { iterations: total });
        }
        let mut il = iu - 1;
        while il > 0 && !small(&t, il) {
            il -= 1;
        }
        if il > 0 {
            t[(il, il - 1)] = ZERO;
        }
        let shift = wilkinson_shift(&t, iu, iter);
        let (g, _) = Givens::make(t[(il, il)] - shift, t[(il + 1, il)]);
        g.apply_left(&mut t, il, il + 1, il, n);
        g.apply_right_adj(&mut t, il, il + 1, 0, (il + 2).min(iu) + 1);
        g.apply_right_adj(&mut q, il, il + 1, 0, n);
        for i in il + 1..iu {
            let (g, rr) = Givens::make(t[(i, i - 1)], t[(i + 1, i - 1)]);
            t[(i, i - 1)] = rr;
            t[(i + 1, i - 1)] = ZERO;
            g.apply_left(&mut t, i, i + 1, i, n);
            g.apply_right_adj(&mut t, i, i + 1, 0, (i + 2).min(iu) + 1);
            g.apply_right_adj(&mut q, i, i + 1, 0, n);
        }
    }
    for j in 0..n {
        for i in j + 1..n {
            t[(i, j)] = ZERO;
        }
    }
    let eigenvalues = t.diagonal();
    Ok(EigenDecomposition { eigenvalues, schur_q: q, schur_t: t })
}

/// Eigenvalues only.
pub fn eigenvalues(a: &CMat) -> Result<Vec<C64>> {
    Ok(eig(a)?.eigenvalues)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::matrix::r;

    fn sorted_re(mut v: Vec<C64>) -> Vec<C64> {
        v.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap());
        v
    }

    #[test]
    fn diagonal_spectrum() {
        let e = sorted_re(eigenvalues(&CMat::real_diag(&[1.0, -1.0])).unwrap());
        assert!((e[0] - r(-1.0)).norm() < 1e-14 && (e[1] - r(1.0)).norm() < 1e-14);
    }

    #[test]
    fn jordan_block() {
        let e = eigenvalues(&CMat::from_real_rows(&[&[1.0, 1.0], &[0.0, 1.0]])).unwrap();
        assert!(e.iter().all(|z| (z - r(1.0)).norm() < 1e-12));
    }

    #[test]
    fn rotation_has_unimodular_pair() {
        let th: f64 = 0.7;
        let a = CMat::from_real_rows(&[&[th.cos(), -th.sin()], &[th.sin(), th.cos()]]);
        let d = eig(&a).unwrap();
        for z in &d.eigenvalues {
            assert!((z.norm() - 1.0).abs() < 1e-13);
            assert!((z.im.abs() - th.sin()).abs() < 1e-13);
        }
        assert!(d.reconstruction_residual(&a) < 1e-13);
    }

    #[test]
    fn companion_of_known_roots() {
        // (x-1)(x-2)(x-3)(x-4) = x^4 - 10x^3 + 35x^2 - 50x + 24
        let a = CMat::from_real_rows(&[
            &[10.0, -35.0, 50.0, -24.0],
            &[1.0, 0.0, 0.0, 0.0],
            &[0.0, 1.0, 0.0, 0.0],
            &[0.0, 0.0, 1.0, 0.0],
        ]);
        let e = sorted_re(eigenvalues(&a).unwrap());
        for (k, z) in e.iter().enumerate() {
            assert!((z - r(k as f64 + 1.0)).norm() < 1e-9, "{z}");
        }
    }
}

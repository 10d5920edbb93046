use super::matrix::{CMat, ZERO};
use crate::error::{KreinError, Result};

/// LU factorization with partial pivoting, `P·A = L·U` packed in one matrix.
#[derive(Debug, Clone)]
pub struct Lu {
    lu: CMat,
    perm: Vec<usize>,
}

impl Lu {
    pub fn new(a: &CMat, pivot_rel: f64) -> Result<Lu> {
        if !a.is_square() {
            return Err(KreinError::DimensionMismatch {
                expected: "square matrix".into(),
                got: format!("{}x{}", a.rows(), a.cols()),
            });
        }
        let n = a.rows();
        let threshold = pivot_rel * a.norm();
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let (p, pmax) = (k..n)
                .map(|i| (i, lu[(i, k)].norm()))
                .fold((k, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
            if pmax <= threshold || pmax == 0.0 {
                return Err(KreinError::SingularMatrix { pivot: pmax, threshold });
            }
            if p != k {
                perm.swap(p, k);
                for j in 0..n {
                    let t = lu[(k, j)];
                    lu[(k, j)] = lu[(p, j)];
                    lu[(p, j)] = t;
                }
            }
            let piv = lu[(k, k)];
            for i in k + 1..n {
                let f = lu[(i, k)] / piv;
                lu[(i, k)] = f;
                if f == ZERO {
                    continue;
                }
                for j in k + 1..n {
                    let u = lu[(k, j)];
                    lu[(i, j)] -= f * u;
                }
            }
        }
        Ok(Lu { lu, perm })
    }

    pub fn solve(&self, b: &CMat) -> CMat {
        let n = self.lu.rows();
        assert_eq!(b.rows(), n, "right-hand side has wrong row count");
        let m = b.cols();
        let mut x = CMat::from_fn(n, m, |i, j| b[(self.perm[i], j)]);
        for j in 0..m {
            for i in 0..n {
                let mut s = x[(i, j)];
                for k in 0..i {
                    s -= self.lu[(i, k)] * x[(k, j)];
                }
                x[(i, j)] = s;
            }
            for i in (0..n).rev() {
                let mut s = x[(i, j)];
                for k in i + 1..n {
                    s -= self.lu[(i, k)] * x[(k, j)];
                }
                x[(i, j)] = s / self.lu[(i, i)];
            }
        }
        x
    }
}

/// Solves `A·X = B`.
pub fn solve(a: &CMat, b: &CMat) -> Result<CMat> {
    solve_with(a, b, 1e-13)
}

pub fn solve_with(a: &CMat, b: &CMat, pivot_rel: f64) -> Result<CMat> {
    if b.rows() != a.rows() {
        return Err(KreinError::DimensionMismatch {
            expected: format!("{} rows", a.rows()),
            got: format!("{} rows", b.rows()),
        });
    }
    Ok(Lu::new(a, pivot_rel)?.solve(b))
}

pub fn inverse(a: &CMat) -> Result<CMat> {
    solve(a, &CMat::identity(a.rows()))
}

//! JSON encodings of matrices and Krein data.

use serde::{Deserialize, Serialize};

use crate::error::{KreinError, Result};
use crate::numerics::{CMat, C64};

/// Row-major complex matrix as `[[re, im], …]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixData {
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<[f64; 2]>,
}

impl From<&CMat> for MatrixData {
    fn from(a: &CMat) -> Self {
        MatrixData { rows: a.rows(), cols: a.cols(), entries: a.data().iter().map(|z| [z.re, z.im]).collect() }
    }
}

impl MatrixData {
    pub fn to_cmat(&self) -> Result<CMat> {
        if self.entries.len() != self.rows * self.cols {
            return Err(KreinError::InvalidInput(format!("{} entries for a {}x{} matrix", self.entries.len(), self.rows, self.cols)));
        }
        CMat::try_new(self.rows, self.cols, self.entries.iter().map(|e| C64::new(e[0], e[1])).collect())
    }
}

/// Square operator on a standard Krein space, optionally with a Real kind.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixFile {
    pub dim: usize,
    pub n_plus: usize,
    pub n_minus: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<[i64; 2]>,
    pub entries: Vec<[f64; 2]>,
}

impl MatrixFile {
    pub fn new(a: &CMat, n_plus: usize, n_minus: usize, kind: Option<[i64; 2]>) -> Self {
        MatrixFile { dim: a.rows(), n_plus, n_minus, kind, entries: a.data().iter().map(|z| [z.re, z.im]).collect() }
    }

    pub fn matrix(&self) -> Result<CMat> {
        if self.n_plus + self.n_minus != self.dim {
            return Err(KreinError::InvalidInput(format!("n_plus + n_minus = {} differs from dim {}", self.n_plus + self.n_minus, self.dim)));
        }
        MatrixData { rows: self.dim, cols: self.dim, entries: self.entries.clone() }.to_cmat()
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| KreinError::InvalidInput(format!("matrix file: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("matrix file serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::c;

    #[test]
    fn round_trip() {
        let a = CMat::from_rows(&[vec![c(1.0, 0.5), c(0.0, -1.0)], vec![c(0.1, 0.0), c(-2.0, 3.0)]]);
        let f = MatrixFile::new(&a, 1, 1, Some([1, -1]));
        let back = MatrixFile::from_json(&f.to_json()).unwrap();
        assert_eq!(back.matrix().unwrap(), a);
        assert_eq!(MatrixData::from(&a).to_cmat().unwrap(), a);
    }

    #[test]
    fn bad_shapes() {
        let f = MatrixFile { dim: 2, n_plus: 1, n_minus: 0, kind: None, entries: vec![[0.0, 0.0]; 4] };
        assert!(f.matrix().is_err());
        let f = MatrixFile { dim: 2, n_plus: 1, n_minus: 1, kind: None, entries: vec![[0.0, 0.0]; 3] };
        assert!(f.matrix().is_err());
    }
}

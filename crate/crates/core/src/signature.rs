//! Krein inertia, per-eigenvalue signatures, the global signature and the
//! ℤ₂ invariants Sig₂ and Sec.

use serde::{Deserialize, Serialize};

use crate::error::{KreinError, Result};
use crate::krein::{is_j_hermitian, is_j_unitary, make_standard, KreinStructure};
use crate::numerics::{herm_eig, CMat, C64, I};
use crate::realsym::{RealKind, RealStructure};
use crate::spectral::{partition, ClusterPartition, OperatorKind, SpectralCluster};
use crate::tolerance::ToleranceConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct InertiaPair {
    pub nu_plus: usize,
    pub nu_minus: usize,
}

impl InertiaPair {
    pub fn new(nu_plus: usize, nu_minus: usize) -> Self {
        InertiaPair { nu_plus, nu_minus }
    }

    pub fn sig(&self) -> i64 {
        self.nu_plus as i64 - self.nu_minus as i64
    }

    pub fn is_definite(&self) -> bool {
        self.nu_plus == 0 || self.nu_minus == 0
    }

    pub fn add(&self, o: &InertiaPair) -> InertiaPair {
        InertiaPair::new(self.nu_plus + o.nu_plus, self.nu_minus + o.nu_minus)
    }
}

/// Inertia of the form Ψ*JΨ on the cluster's range frame.
pub fn inertia(cluster: &SpectralCluster, k: &KreinStructure, zero_tol: f64) -> Result<InertiaPair> {
    form_inertia(&cluster.frame, k, zero_tol).map_err(|e| match e {
        KreinError::DegenerateForm { value, .. } => KreinError::DegenerateForm { center: cluster.center, value },
        other => other,
    })
}

/// Inertia of Ψ*JΨ for an arbitrary frame Ψ.
pub fn form_inertia(frame: &CMat, k: &KreinStructure, zero_tol: f64) -> Result<InertiaPair> {
    if frame.cols() == 0 {
        return Ok(InertiaPair::default());
    }
    let form = frame.adjoint_mul(&k.left(frame)).hermitian_part();
    let (d, _) = herm_eig(&form)?;
    if let Some(&v) = d.iter().find(|x| x.abs() <= zero_tol) {
        return Err(KreinError::DegenerateForm { center: C64::new(f64::NAN, f64::NAN), value: v });
    }
    Ok(InertiaPair::new(d.iter().filter(|&&x| x > 0.0).count(), d.iter().filter(|&&x| x < 0.0).count()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterRow {
    pub eigenvalue: C64,
    pub multiplicity: usize,
    pub nu: InertiaPair,
    pub sig: i64,
    pub on_boundary: bool,
    /// Partner cluster under the Krein reflection for off-boundary clusters.
    pub paired_with: Option<C64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InvariantReport {
    pub kind: OperatorKind,
    pub n_plus: usize,
    pub n_minus: usize,
    pub clusters: Vec<ClusterRow>,
    pub sig: i64,
    pub sig2: Option<u8>,
    pub sec: Option<u8>,
    /// N₊ − N₋.
    pub expected_sig: i64,
    pub sig_law_holds: bool,
    pub membership_residual: f64,
}

impl InvariantReport {
    /// Sig(λ) for the boundary cluster at λ, 0 if λ is not an eigenvalue.
    pub fn sig_at(&self, lambda: C64, tol: f64) -> i64 {
        self.clusters
            .iter()
            .filter(|c| c.on_boundary && (c.eigenvalue - lambda).norm() <= tol)
            .map(|c| c.sig)
            .sum()
    }

    pub fn boundary_dimension(&self) -> usize {
        self.clusters.iter().filter(|c| c.on_boundary).map(|c| c.multiplicity).sum()
    }
}

pub fn membership_residual(a: &CMat, k: &KreinStructure, kind: OperatorKind) -> Result<f64> {
    Ok(match kind {
        OperatorKind::Unitary => is_j_unitary(a, k, 0.0)?.1,
        OperatorKind::Hermitian => is_j_hermitian(a, k, 0.0)?.1,
    })
}

/// Per-cluster rows for an existing partition.
pub fn cluster_rows(part: &ClusterPartition, k: &KreinStructure, kind: OperatorKind, tol: &ToleranceConfig) -> Result<Vec<ClusterRow>> {
    let region = kind.boundary_region();
    let mut rows = Vec::with_capacity(part.clusters.len());
    for c in &part.clusters {
        let on = region.contains(c.center, tol.eps_region)?;
        if on {
            let nu = inertia(c, k, tol.zero)?;
            rows.push(ClusterRow { eigenvalue: c.center, multiplicity: c.multiplicity, nu, sig: nu.sig(), on_boundary: true, paired_with: None });
        } else {
            let target = kind.krein_reflection(c.center);
            let partner = part
                .clusters
                .iter()
                .min_by(|a, b| (a.center - target).norm().partial_cmp(&(b.center - target).norm()).unwrap())
                .map(|p| p.center);
            rows.push(ClusterRow {
                eigenvalue: c.center,
                multiplicity: c.multiplicity,
                nu: InertiaPair::default(),
                sig: 0,
                on_boundary: false,
                paired_with: partner,
            });
        }
    }
    Ok(rows)
}

/// Full invariant report for a J-unitary or J-hermitian matrix.
pub fn global_signature(a: &CMat, k: &KreinStructure, kind: OperatorKind, tol: &ToleranceConfig) -> Result<InvariantReport> {
    let membership = membership_residual(a, k, kind)?;
    let part = partition(a, tol)?;
    let clusters = cluster_rows(&part, k, kind, tol)?;
    let sig: i64 = clusters.iter().map(|c| c.sig).sum();
    let expected_sig = k.signature();
    Ok(InvariantReport {
        kind,
        n_plus: k.n_plus,
        n_minus: k.n_minus,
        clusters,
        sig,
        sig2: None,
        sec: None,
        expected_sig,
        sig_law_holds: sig == expected_sig,
        membership_residual: membership,
    })
}

/// The special point of the Real reflection: 1 for unitaries, 0 for hermitians.
pub fn special_point(kind: OperatorKind) -> C64 {
    match kind {
        OperatorKind::Unitary => C64::new(1.0, 0.0),
        OperatorKind::Hermitian => C64::new(0.0, 0.0),
    }
}

/// Sig₂ = (½ · on-boundary dimension) mod 2, kind (−1,−1) only.
pub fn sig2_from_report(report: &InvariantReport, rs: &RealStructure) -> Result<u8> {
    if rs.kind != RealKind::new(-1, -1) {
        return Err(KreinError::InvalidInput("Sig2 is defined for kind (-1,-1) only".into()));
    }
    let dim = report.boundary_dimension();
    if dim % 2 != 0 {
        return Err(KreinError::OddDimension { dim });
    }
    Ok(((dim / 2) % 2) as u8)
}

pub fn sig2(a: &CMat, rs: &RealStructure, kind: OperatorKind, tol: &ToleranceConfig) -> Result<u8> {
    let report = global_signature(a, &rs.krein, kind, tol)?;
    sig2_from_report(&report, rs)
}

/// Sec = Sig(1,T) mod 2 (hermitian variant: Sig(0,H) mod 2), kind (1,1) only.
pub fn sec_from_report(report: &InvariantReport, rs: &RealStructure, tol: &ToleranceConfig) -> Result<u8> {
    if rs.kind != RealKind::new(1, 1) {
        return Err(KreinError::InvalidInput("Sec is defined for kind (1,1) only".into()));
    }
    let s = report.sig_at(special_point(report.kind), tol.special_point);
    Ok(s.rem_euclid(2) as u8)
}

pub fn sec(t: &CMat, rs: &RealStructure, kind: OperatorKind, tol: &ToleranceConfig) -> Result<u8> {
    let report = global_signature(t, &rs.krein, kind, tol)?;
    sec_from_report(&report, rs, tol)
}

/// `H = i·[[0, A*], [A, 0]]` on the Krein space with N₊ = cols(A), N₋ = rows(A).
pub fn build_index_example(a: &CMat) -> (CMat, KreinStructure) {
    let (m, n) = (a.rows(), a.cols());
    let k = make_standard(n, m);
    let mut h = CMat::zeros(n + m, n + m);
    h.set_block(0, n, &a.adjoint().scale(I));
    h.set_block(n, 0, &a.scale(I));
    (h, k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::r;

    #[test]
    fn identity_on_one_one_is_indefinite() {
        let k = make_standard(1, 1);
        let rep = global_signature(&CMat::identity(2), &k, OperatorKind::Unitary, &ToleranceConfig::default()).unwrap();
        assert_eq!(rep.clusters.len(), 1);
        assert_eq!(rep.clusters[0].nu, InertiaPair::new(1, 1));
        assert_eq!(rep.sig, 0);
    }

    #[test]
    fn j_as_hermitian() {
        let k = make_standard(3, 1);
        let rep = global_signature(&k.j(), &k, OperatorKind::Hermitian, &ToleranceConfig::default()).unwrap();
        assert_eq!(rep.sig, 2);
        assert!(rep.sig_law_holds);
    }

    #[test]
    fn two_by_two_real_pair_inertia() {
        let k = make_standard(1, 1);
        let h = CMat::from_real_rows(&[&[2.0, 1.0], &[-1.0, -2.0]]);
        let rep = global_signature(&h, &k, OperatorKind::Hermitian, &ToleranceConfig::default()).unwrap();
        let s3 = 3f64.sqrt();
        let plus = rep.clusters.iter().find(|c| (c.eigenvalue - r(s3)).norm() < 1e-9).unwrap();
        let minus = rep.clusters.iter().find(|c| (c.eigenvalue - r(-s3)).norm() < 1e-9).unwrap();
        assert_eq!(plus.nu, InertiaPair::new(1, 0));
        assert_eq!(minus.nu, InertiaPair::new(0, 1));
    }

    #[test]
    fn index_example_scalar() {
        let (h, k) = build_index_example(&CMat::identity(1));
        assert_eq!(h, CMat::from_rows(&[vec![r(0.0), I], vec![I, r(0.0)]]));
        let rep = global_signature(&h, &k, OperatorKind::Hermitian, &ToleranceConfig::default()).unwrap();
        assert_eq!(rep.sig, 0);
    }

    #[test]
    fn index_example_zero_column() {
        // A: C^1 -> C^2 zero map, Ind = 1 - 2
        let (h, k) = build_index_example(&CMat::zeros(2, 1));
        assert_eq!((k.n_plus, k.n_minus), (1, 2));
        let rep = global_signature(&h, &k, OperatorKind::Hermitian, &ToleranceConfig::default()).unwrap();
        assert_eq!(rep.sig, -1);
    }
}

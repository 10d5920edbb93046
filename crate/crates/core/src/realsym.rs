//! Real Krein structures of kind (η, τ): normal forms of S, membership,
//! Table-1 group classification, spectral symmetry checks and Kramers
//! degeneracy.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{KreinError, Result};
use crate::krein::{random_j_hermitian, KreinStructure};
use crate::numerics::{matrix_exp, null_space, r, CMat, C64, I};
use crate::signature::{global_signature, sec_from_report, sig2_from_report, InvariantReport};
use crate::spectral::{partition, ClusterPartition, OperatorKind};
use crate::tolerance::ToleranceConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RealKind {
    pub eta: i8,
    pub tau: i8,
}

impl RealKind {
    pub fn new(eta: i8, tau: i8) -> Self {
        assert!(eta.abs() == 1 && tau.abs() == 1, "kind entries must be ±1");
        RealKind { eta, tau }
    }

    pub fn all() -> [RealKind; 4] {
        [RealKind::new(1, 1), RealKind::new(-1, -1), RealKind::new(-1, 1), RealKind::new(1, -1)]
    }

    pub fn try_new(eta: i64, tau: i64) -> Result<Self> {
        if eta.abs() != 1 || tau.abs() != 1 {
            return Err(KreinError::InvalidInput(format!("kind ({eta},{tau}) must have entries ±1")));
        }
        Ok(RealKind { eta: eta as i8, tau: tau as i8 })
    }
}

impl fmt::Display for RealKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.eta, self.tau)
    }
}

#[derive(Debug, Clone)]
pub struct RealStructure {
    pub kind: RealKind,
    pub s: CMat,
    pub krein: KreinStructure,
}

/// The 2×2 block s = [[0, −1], [1, 0]].
pub fn small_s() -> CMat {
    CMat::from_real_rows(&[&[0.0, -1.0], &[1.0, 0.0]])
}

/// Block s = [[0, −1_m], [1_m, 0]] of size 2m.
pub fn block_s(m: usize) -> CMat {
    let mut s = CMat::zeros(2 * m, 2 * m);
    s.set_block(0, m, &CMat::identity(m).scale_re(-1.0));
    s.set_block(m, 0, &CMat::identity(m));
    s
}

pub fn make_real_structure(kind: RealKind, n_plus: usize, n_minus: usize) -> Result<RealStructure> {
    let krein = crate::krein::make_standard(n_plus, n_minus);
    let n = n_plus + n_minus;
    let incompatible = || KreinError::IncompatibleDimensions { eta: kind.eta, tau: kind.tau, n_plus, n_minus };
    let s = match (kind.eta, kind.tau) {
        (1, 1) => CMat::identity(n),
        (-1, 1) => {
            if n_plus % 2 != 0 || n_minus % 2 != 0 {
                return Err(incompatible());
            }
            CMat::identity(n / 2).kron(&small_s())
        }
        (eta, _) => {
            if n_plus != n_minus {
                return Err(incompatible());
            }
            let m = n_plus;
            let mut s = CMat::zeros(n, n);
            s.set_block(0, m, &CMat::identity(m).scale_re(eta as f64));
            s.set_block(m, 0, &CMat::identity(m));
            s
        }
    };
    Ok(RealStructure { kind, s, krein })
}

impl RealStructure {
    /// `S*·Ā·S`.
    pub fn reflect(&self, a: &CMat) -> CMat {
        self.s.adjoint() * a.conj() * &self.s
    }

    /// Defect of the structural relations (reality, S² = η, JS = τSJ).
    pub fn structure_residual(&self) -> f64 {
        let eta = self.kind.eta as f64;
        let tau = self.kind.tau as f64;
        let j = self.krein.j();
        let a = self.s.max_imag();
        let b = (&self.s * &self.s - CMat::identity(self.s.rows()).scale_re(eta)).norm();
        let c = (&j * &self.s - (&self.s * &j).scale_re(tau)).norm();
        a.max(b).max(c)
    }
}

/// Residual of the Real symmetry relation; membership if within `tol`.
pub fn is_member(a: &CMat, rs: &RealStructure, kind: OperatorKind, tol: f64) -> Result<(bool, f64)> {
    if !a.is_square() || a.rows() != rs.s.rows() {
        return Err(KreinError::DimensionMismatch {
            expected: format!("{0}x{0}", rs.s.rows()),
            got: format!("{}x{}", a.rows(), a.cols()),
        });
    }
    let refl = rs.reflect(a);
    let res = match kind {
        OperatorKind::Unitary => (refl - a).norm(),
        OperatorKind::Hermitian => (refl + a).norm(),
    };
    Ok((res <= tol, res))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupClass {
    pub name: String,
    pub invariants: Vec<String>,
    /// Generic destabilization scenarios.
    pub bifurcations: Vec<String>,
    /// Inertia reflection rule: "nu±(λ)=nu±(conj λ)" or "nu±(λ)=nu∓(conj λ)".
    pub inertia_rule: Option<String>,
}

/// Table-1 lookup; `None` means no Real structure (the full U(p,q)).
pub fn classify_group(rs: Option<&RealStructure>, k: &KreinStructure) -> GroupClass {
    let strs = |v: &[&str]| v.iter().map(|s| s.to_string()).collect::<Vec<_>>();
    match rs {
        None => GroupClass {
            name: format!("U({},{})", k.n_plus, k.n_minus),
            invariants: strs(&["Sig"]),
            bifurcations: strs(&["KC"]),
            inertia_rule: None,
        },
        Some(rs) => {
            let (p, q) = (rs.krein.n_plus, rs.krein.n_minus);
            match (rs.kind.eta, rs.kind.tau) {
                (1, 1) => GroupClass {
                    name: format!("O({p},{q})"),
                    invariants: strs(&["Sig", "Sec"]),
                    bifurcations: strs(&["QKC", "MTB", "MPD"]),
                    inertia_rule: Some("nu±(λ)=nu±(conj λ)".into()),
                },
                (-1, -1) => GroupClass {
                    name: format!("SO*({})", 2 * p),
                    invariants: strs(&["Sig2"]),
                    bifurcations: strs(&["QKC"]),
                    inertia_rule: Some("nu±(λ)=nu∓(conj λ)".into()),
                },
                (-1, 1) => GroupClass {
                    name: format!("SP({p},{q})"),
                    invariants: strs(&["Sig in 2Z"]),
                    bifurcations: strs(&["QKC"]),
                    inertia_rule: Some("nu±(λ)=nu±(conj λ)".into()),
                },
                _ => GroupClass {
                    name: format!("SP({},R)", 2 * p),
                    invariants: vec![],
                    bifurcations: strs(&["QKC", "TB", "PD"]),
                    inertia_rule: Some("nu±(λ)=nu∓(conj λ)".into()),
                },
            }
        }
    }
}

/// Images of λ under the full reflection group of a Real member.
pub fn reflection_images(z: C64, kind: OperatorKind) -> Vec<C64> {
    let one = C64::new(1.0, 0.0);
    match kind {
        OperatorKind::Unitary => vec![z.conj(), one / z, one / z.conj()],
        OperatorKind::Hermitian => vec![z.conj(), -z, -z.conj()],
    }
}

/// Real reflection of a cluster centre: λ̄ (unitary) or −λ̄ (hermitian).
pub fn real_reflection(z: C64, kind: OperatorKind) -> C64 {
    match kind {
        OperatorKind::Unitary => z.conj(),
        OperatorKind::Hermitian => -z.conj(),
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SymmetryReport {
    /// Worst multiset matching distance over all images.
    pub max_eigenvalue_mismatch: f64,
    /// Worst ‖S*·P̄_Δ·S − P_Δ'‖.
    pub max_projection_residual: f64,
}

fn find_partner<'a>(part: &'a ClusterPartition, target: C64, tol: f64) -> Option<&'a crate::spectral::SpectralCluster> {
    part.clusters
        .iter()
        .min_by(|a, b| (a.center - target).norm().partial_cmp(&(b.center - target).norm()).unwrap())
        .filter(|p| (p.center - target).norm() <= tol * (1.0 + target.norm()))
}

/// Checks closure of σ(A) under the reflection group (cluster-wise, with
/// multiplicities) and the projection conjugation relation.
pub fn check_spectral_symmetries(a: &CMat, rs: &RealStructure, kind: OperatorKind, tol: &ToleranceConfig) -> Result<SymmetryReport> {
    let part = partition(a, tol)?;
    check_spectral_symmetries_on(&part, rs, kind, tol)
}

pub fn check_spectral_symmetries_on(part: &ClusterPartition, rs: &RealStructure, kind: OperatorKind, tol: &ToleranceConfig) -> Result<SymmetryReport> {
    let mut max_mis: f64 = 0.0;
    let mut max_proj: f64 = 0.0;
    for c in &part.clusters {
        for img in reflection_images(c.center, kind) {
            let p = find_partner(part, img, tol.matching).ok_or(KreinError::SymmetryViolated { lambda: c.center })?;
            if p.multiplicity != c.multiplicity {
                return Err(KreinError::SymmetryViolated { lambda: c.center });
            }
            max_mis = max_mis.max((p.center - img).norm());
        }
        let target = real_reflection(c.center, kind);
        let p = find_partner(part, target, tol.matching).ok_or(KreinError::SymmetryViolated { lambda: c.center })?;
        max_proj = max_proj.max((rs.reflect(&c.projection) - &p.projection).norm());
    }
    Ok(SymmetryReport { max_eigenvalue_mismatch: max_mis, max_projection_residual: max_proj })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KramersReport {
    pub ok: bool,
    /// (eigenvalue, algebraic multiplicity, geometric multiplicity) of the
    /// symmetric-point clusters inspected.
    pub clusters: Vec<(C64, usize, usize)>,
    pub violations: Vec<(C64, usize, usize)>,
}

/// For η = −1: real eigenvalues of unitaries / imaginary eigenvalues of
/// hermitians must have even algebraic and geometric multiplicity.
pub fn kramers_check(a: &CMat, rs: &RealStructure, kind: OperatorKind, tol: &ToleranceConfig) -> Result<KramersReport> {
    if rs.kind.eta != -1 {
        return Err(KreinError::InvalidInput("Kramers check requires eta = -1".into()));
    }
    let part = partition(a, tol)?;
    let mut clusters = Vec::new();
    let mut violations = Vec::new();
    let scale = 1.0f64.max(a.norm());
    for c in &part.clusters {
        let on_line = match kind {
            OperatorKind::Unitary => c.center.im.abs() <= tol.eps_region,
            OperatorKind::Hermitian => c.center.re.abs() <= tol.eps_region,
        };
        if !on_line {
            continue;
        }
        let alg = c.projection.trace().re.round() as usize;
        let geo = null_space(&a.shift(c.center), 1e-7, scale).cols();
        clusters.push((c.center, alg, geo));
        if alg % 2 != 0 || geo % 2 != 0 {
            violations.push((c.center, alg, geo));
        }
    }
    Ok(KramersReport { ok: violations.is_empty(), clusters, violations })
}

/// Projection H ↦ ½(H − S*H̄S) onto the Real-symmetric hermitians.
pub fn symmetrize_hermitian(h: &CMat, rs: &RealStructure) -> CMat {
    (h - &rs.reflect(h)).scale_re(0.5)
}

/// Projection T ↦ ½(T + S*T̄S) (used for generator-level symmetrization).
pub fn symmetrize_unitary_generator(t: &CMat, rs: &RealStructure) -> CMat {
    (t + &rs.reflect(t)).scale_re(0.5)
}

/// Random member of ℍ(K,J,S) or 𝕌(K,J,S).
pub fn random_member(rs: &RealStructure, kind: OperatorKind, seed: u64) -> CMat {
    let h = symmetrize_hermitian(&random_j_hermitian(&rs.krein, seed), rs);
    match kind {
        OperatorKind::Hermitian => h,
        OperatorKind::Unitary => matrix_exp(&h.scale(I)),
    }
}

/// Invariant report with the kind-specific invariants and constraints.
pub fn full_invariant_report(a: &CMat, rs: &RealStructure, kind: OperatorKind, tol: &ToleranceConfig) -> Result<InvariantReport> {
    let mut rep = global_signature(a, &rs.krein, kind, tol)?;
    match (rs.kind.eta, rs.kind.tau) {
        (1, 1) => {
            rep.sec = Some(sec_from_report(&rep, rs, tol)?);
        }
        (-1, -1) => {
            if rep.sig != 0 {
                return Err(KreinError::InvariantConstraintViolated(format!("Sig = {} for kind (-1,-1)", rep.sig)));
            }
            rep.sig2 = Some(sig2_from_report(&rep, rs)?);
        }
        (-1, 1) => {
            if rep.sig % 2 != 0 {
                return Err(KreinError::InvariantConstraintViolated(format!("Sig = {} is odd for kind (-1,1)", rep.sig)));
            }
        }
        _ => {
            if rep.sig != 0 {
                return Err(KreinError::InvariantConstraintViolated(format!("Sig = {} for kind (1,-1)", rep.sig)));
            }
        }
    }
    Ok(rep)
}

/// Cluster-wise check of ν±(λ) = ν±τ(λ') with λ' = λ̄ (unitary) or −λ̄
/// (hermitian). Returns the offending eigenvalues.
pub fn inertia_reflection_violations(rep: &InvariantReport, rs: &RealStructure, tol: f64) -> Vec<C64> {
    let mut bad = Vec::new();
    for row in rep.clusters.iter().filter(|c| c.on_boundary) {
        let target = real_reflection(row.eigenvalue, rep.kind);
        let partner = rep
            .clusters
            .iter()
            .filter(|c| c.on_boundary)
            .find(|c| (c.eigenvalue - target).norm() <= tol * (1.0 + target.norm()));
        match partner {
            None => bad.push(row.eigenvalue),
            Some(p) => {
                let ok = if rs.kind.tau == 1 {
                    p.nu == row.nu
                } else {
                    p.nu.nu_plus == row.nu.nu_minus && p.nu.nu_minus == row.nu.nu_plus
                };
                if !ok {
                    bad.push(row.eigenvalue);
                }
            }
        }
    }
    bad
}

/// Real orthogonal basis change `O` (commuting with J when τ = 1) such that
/// `Oᵀ·S·O` is the normal form of its kind. `S` must be real orthogonal and
/// satisfy the kind relations with the standard J.
pub fn normal_form_basis(s: &CMat, k: &KreinStructure, kind: RealKind) -> Result<CMat> {
    let n = k.dim();
    let candidate = RealStructure { kind, s: s.clone(), krein: *k };
    if s.rows() != n || !s.is_square() {
        return Err(KreinError::DimensionMismatch { expected: format!("{n}x{n}"), got: format!("{}x{}", s.rows(), s.cols()) });
    }
    let fail = |msg: &str| KreinError::FramePreparationFailed(format!("normal form: {msg}"));
    if candidate.structure_residual() > 1e-10 {
        return Err(fail("S violates the kind relations"));
    }
    if (s.adjoint() * s).dist(&CMat::identity(n)) > 1e-10 {
        return Err(fail("S is not orthogonal"));
    }
    let target = make_real_structure(kind, k.n_plus, k.n_minus)?;
    let o = match (kind.eta, kind.tau) {
        (1, 1) => {
            if s.dist(&CMat::identity(n)) > 1e-10 {
                return Err(fail("an involution other than 1 cannot be conjugated to S = 1"));
            }
            CMat::identity(n)
        }
        (-1, 1) => {
            let op = complex_structure_basis(&s.submatrix(0, k.n_plus, 0, k.n_plus)).ok_or_else(|| fail("positive block"))?;
            let om = complex_structure_basis(&s.submatrix(k.n_plus, k.n_minus, k.n_plus, k.n_minus)).ok_or_else(|| fail("negative block"))?;
            CMat::block_diag(&op, &om)
        }
        _ => {
            let m = k.n_plus;
            let b = s.submatrix(m, m, 0, m);
            CMat::block_diag(&CMat::identity(m), &b)
        }
    };
    if (o.transpose() * s * &o).dist(&target.s) > 1e-9 {
        return Err(fail("conjugation did not reach the normal form"));
    }
    Ok(o)
}

/// Orthogonal `O` with `Oᵀ·S·O = 1 ⊗ s` for a real orthogonal `S`, `S² = −1`.
fn complex_structure_basis(s: &CMat) -> Option<CMat> {
    let n = s.rows();
    if n % 2 != 0 {
        return None;
    }
    let mut cols: Vec<Vec<C64>> = Vec::new();
    for e in 0..n {
        if cols.len() == n {
            break;
        }
        let mut v: Vec<C64> = (0..n).map(|i| r(if i == e { 1.0 } else { 0.0 })).collect();
        for c in &cols {
            let d: C64 = c.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
            for i in 0..n {
                v[i] -= c[i] * d;
            }
        }
        let nv = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if nv < 1e-8 {
            continue;
        }
        for z in v.iter_mut() {
            *z /= nv;
        }
        let sv = s.mul_vec(&v);
        cols.push(v);
        cols.push(sv);
    }
    if cols.len() != n {
        return None;
    }
    // reorder so that pairs (v, Sv) form consecutive 2×2 blocks
    Some(CMat::from_cols(n, &cols))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normal_forms() {
        let s = make_real_structure(RealKind::new(1, 1), 2, 1).unwrap().s;
        assert_eq!(s, CMat::identity(3));
        let s = make_real_structure(RealKind::new(1, -1), 1, 1).unwrap().s;
        assert_eq!(s, CMat::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]));
        let s = make_real_structure(RealKind::new(-1, -1), 2, 2).unwrap().s;
        let mut expect = CMat::zeros(4, 4);
        expect.set_block(0, 2, &CMat::identity(2).scale_re(-1.0));
        expect.set_block(2, 0, &CMat::identity(2));
        assert_eq!(s, expect);
        assert!(make_real_structure(RealKind::new(-1, 1), 1, 2).is_err());
        assert!(make_real_structure(RealKind::new(1, -1), 2, 1).is_err());
        for kind in RealKind::all() {
            let (p, q) = if kind.tau == -1 { (2, 2) } else { (2, 4) };
            assert!(make_real_structure(kind, p, q).unwrap().structure_residual() < 1e-15);
        }
    }

    #[test]
    fn membership_examples() {
        let rs = make_real_structure(RealKind::new(1, 1), 1, 1).unwrap();
        let th: f64 = 0.4;
        let t = CMat::diag(&[C64::from_polar(1.0, th), C64::from_polar(1.0, th)]);
        assert!(!is_member(&t, &rs, OperatorKind::Unitary, 1e-10).unwrap().0);
        for kind in RealKind::all() {
            let rs = make_real_structure(kind, 2, 2).unwrap();
            assert!(is_member(&CMat::zeros(4, 4), &rs, OperatorKind::Hermitian, 0.0).unwrap().0);
        }
    }

    #[test]
    fn group_table() {
        let k = crate::krein::make_standard(2, 2);
        let g = classify_group(Some(&make_real_structure(RealKind::new(1, 1), 2, 2).unwrap()), &k);
        assert_eq!(g.name, "O(2,2)");
        assert_eq!(g.invariants, vec!["Sig", "Sec"]);
        let g = classify_group(Some(&make_real_structure(RealKind::new(-1, -1), 2, 2).unwrap()), &k);
        assert_eq!(g.name, "SO*(4)");
        assert_eq!(g.invariants, vec!["Sig2"]);
        assert_eq!(classify_group(None, &k).name, "U(2,2)");
    }

    #[test]
    fn symmetrizer_idempotent_and_zero() {
        let rs = make_real_structure(RealKind::new(-1, 1), 2, 2).unwrap();
        let h = random_j_hermitian(&rs.krein, 3);
        let p1 = symmetrize_hermitian(&h, &rs);
        let p2 = symmetrize_hermitian(&p1, &rs);
        assert!(p1.dist(&p2) < 1e-14);
        assert_eq!(symmetrize_hermitian(&CMat::zeros(4, 4), &rs), CMat::zeros(4, 4));
    }

    #[test]
    fn normal_form_helper_rotated_structure() {
        // conjugate the (−1,1) normal form by a J-block orthogonal rotation
        let k = crate::krein::make_standard(2, 2);
        let kind = RealKind::new(-1, 1);
        let th: f64 = 0.3;
        let rot = CMat::from_real_rows(&[&[th.cos(), -th.sin()], &[th.sin(), th.cos()]]);
        let q = CMat::block_diag(&CMat::identity(2), &rot);
        let s0 = make_real_structure(kind, 2, 2).unwrap().s;
        let s = q.transpose() * &s0 * &q;
        let o = normal_form_basis(&s, &k, kind).unwrap();
        assert!((o.transpose() * &s * &o).dist(&s0) < 1e-12);
    }
}

//! Cayley transforms between J-hermitian and J-unitary matrices.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{KreinError, Result};
use crate::krein::KreinStructure;
use crate::numerics::{eigenvalues, solve, CMat, C64, I};
use crate::signature::{cluster_rows, membership_residual, InvariantReport};
use crate::spectral::{partition, ClusterPartition, OperatorKind};
use crate::tolerance::ToleranceConfig;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CayleyParams {
    z: C64,
    zeta: C64,
}

impl CayleyParams {
    pub fn new(z: C64, zeta: C64) -> Result<Self> {
        if !(z.im.abs() > 1e-10) {
            return Err(KreinError::InvalidCayleyParams(format!("Im z = {} too small", z.im)));
        }
        if !((zeta.norm() - 1.0).abs() <= 1e-12) {
            return Err(KreinError::InvalidCayleyParams(format!("|zeta| = {} is not 1", zeta.norm())));
        }
        Ok(CayleyParams { z, zeta })
    }

    pub fn z(&self) -> C64 {
        self.z
    }

    pub fn zeta(&self) -> C64 {
        self.zeta
    }
}

impl Default for CayleyParams {
    fn default() -> Self {
        CayleyParams { z: I, zeta: C64::new(1.0, 0.0) }
    }
}

/// A point of the Riemann sphere.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Extended {
    Finite(C64),
    Infinity,
}

impl Extended {
    pub fn finite(self) -> Option<C64> {
        match self {
            Extended::Finite(z) => Some(z),
            Extended::Infinity => None,
        }
    }
}

/// ζ(λ − z)/(λ − z̄), extended to the Riemann sphere.
pub fn cayley_scalar(p: &CayleyParams, lambda: Extended) -> Extended {
    match lambda {
        Extended::Infinity => Extended::Finite(p.zeta),
        Extended::Finite(l) => {
            let den = l - p.z.conj();
            if den == C64::new(0.0, 0.0) {
                Extended::Infinity
            } else {
                Extended::Finite(p.zeta * (l - p.z) / den)
            }
        }
    }
}

/// Inverse scalar map (zζ − z̄μ)/(ζ − μ).
pub fn cayley_scalar_inv(p: &CayleyParams, mu: Extended) -> Extended {
    match mu {
        Extended::Infinity => Extended::Finite(p.z.conj()),
        Extended::Finite(m) => {
            let den = p.zeta - m;
            if den == C64::new(0.0, 0.0) {
                Extended::Infinity
            } else {
                Extended::Finite((p.z * p.zeta - p.z.conj() * m) / den)
            }
        }
    }
}

fn check_square(a: &CMat, k: &KreinStructure) -> Result<()> {
    if !a.is_square() || a.rows() != k.dim() {
        return Err(KreinError::DimensionMismatch {
            expected: format!("{0}x{0}", k.dim()),
            got: format!("{}x{}", a.rows(), a.cols()),
        });
    }
    Ok(())
}

fn min_distance(eigs: &[C64], point: C64) -> f64 {
    eigs.iter().map(|e| (e - point).norm()).fold(f64::INFINITY, f64::min)
}

/// T = ζ(H − z)(H − z̄)⁻¹.
pub fn cayley_op(h: &CMat, k: &KreinStructure, p: &CayleyParams, tol: &ToleranceConfig) -> Result<CMat> {
    check_square(h, k)?;
    let eigs = eigenvalues(h)?;
    let d = min_distance(&eigs, p.z).min(min_distance(&eigs, p.z.conj()));
    if d <= tol.cayley_gap {
        return Err(KreinError::SpectrumTooClose { point: p.z, distance: d });
    }
    let num = h.shift(p.z).scale(p.zeta);
    let den = h.shift(p.z.conj());
    // X·den = num  ⇔  den*·X* = num*
    let xt = solve(&den.adjoint(), &num.adjoint())?;
    Ok(xt.adjoint())
}

/// H = (zζ − z̄T)(ζ − T)⁻¹.
pub fn cayley_inv_op(t: &CMat, k: &KreinStructure, p: &CayleyParams, tol: &ToleranceConfig) -> Result<CMat> {
    check_square(t, k)?;
    let eigs = eigenvalues(t)?;
    let d = min_distance(&eigs, p.zeta);
    if d <= tol.cayley_gap {
        return Err(KreinError::SpectrumTooClose { point: p.zeta, distance: d });
    }
    let n = t.rows();
    let num = CMat::identity(n).scale(p.z * p.zeta) - t.scale(p.z.conj());
    let den = CMat::identity(n).scale(p.zeta) - t;
    let xt = solve(&den.adjoint(), &num.adjoint())?;
    Ok(xt.adjoint())
}

/// The 16th root of unity farthest from σ(T), scanning 1, −1, i, −i first.
pub fn auto_zeta(t: &CMat) -> Result<C64> {
    let eigs = eigenvalues(t)?;
    let mut order: Vec<usize> = vec![0, 8, 4, 12];
    order.extend((0..16).filter(|k| k % 4 != 0));
    let mut best = C64::new(1.0, 0.0);
    let mut best_d = -1.0;
    for k in order {
        let w = C64::from_polar(1.0, 2.0 * PI * k as f64 / 16.0);
        let d = min_distance(&eigs, w);
        if d > best_d + 1e-12 {
            best = w;
            best_d = d;
        }
    }
    Ok(best)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClusterMatch {
    pub hermitian_eigenvalue: C64,
    pub unitary_eigenvalue: C64,
    pub inertia_equal: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TransportReport {
    pub hermitian: InvariantReport,
    pub unitary: InvariantReport,
    pub matches: Vec<ClusterMatch>,
    pub inertia_preserved: bool,
    pub sig_preserved: bool,
}

fn report_from(a: &CMat, k: &KreinStructure, kind: OperatorKind, part: &ClusterPartition, tol: &ToleranceConfig) -> Result<InvariantReport> {
    let clusters = cluster_rows(part, k, kind, tol)?;
    let sig: i64 = clusters.iter().map(|c| c.sig).sum();
    Ok(InvariantReport {
        kind,
        n_plus: k.n_plus,
        n_minus: k.n_minus,
        clusters,
        sig,
        sig2: None,
        sec: None,
        expected_sig: k.signature(),
        sig_law_holds: sig == k.signature(),
        membership_residual: membership_residual(a, k, kind)?,
    })
}

/// Invariant reports of H and C(H), matched cluster by cluster through the
/// scalar map.
pub fn transport_report(h: &CMat, k: &KreinStructure, p: &CayleyParams, tol: &ToleranceConfig) -> Result<TransportReport> {
    let t = cayley_op(h, k, p, tol)?;
    let ph = partition(h, tol)?;
    let pt = partition(&t, tol)?;
    let rh = report_from(h, k, OperatorKind::Hermitian, &ph, tol)?;
    let rt = report_from(&t, k, OperatorKind::Unitary, &pt, tol)?;
    let mut matches = Vec::new();
    let mut used = vec![false; pt.clusters.len()];
    for (i, c) in ph.clusters.iter().enumerate() {
        let images: Vec<C64> = c
            .eigenvalues
            .iter()
            .map(|&l| cayley_scalar(p, Extended::Finite(l)).finite().unwrap_or(C64::new(f64::INFINITY, 0.0)))
            .collect();
        let w = images.iter().sum::<C64>() / images.len() as f64;
        let j = pt
            .clusters
            .iter()
            .enumerate()
            .filter(|(j, _)| !used[*j])
            .min_by(|a, b| (a.1.center - w).norm().partial_cmp(&(b.1.center - w).norm()).unwrap())
            .map(|(j, _)| j);
        let j = match j {
            Some(j) if (pt.clusters[j].center - w).norm() <= tol.matching * (1.0 + w.norm()) => j,
            _ => return Err(KreinError::ClusterMatchFailed { lambda: c.center }),
        };
        if pt.clusters[j].multiplicity != c.multiplicity {
            return Err(KreinError::ClusterMatchFailed { lambda: c.center });
        }
        used[j] = true;
        let (a, b) = (&rh.clusters[i], &rt.clusters[j]);
        matches.push(ClusterMatch {
            hermitian_eigenvalue: a.eigenvalue,
            unitary_eigenvalue: b.eigenvalue,
            inertia_equal: a.nu == b.nu && a.on_boundary == b.on_boundary,
        });
    }
    let inertia_preserved = matches.iter().all(|m| m.inertia_equal);
    let sig_preserved = rh.sig == rt.sig;
    Ok(TransportReport { hermitian: rh, unitary: rt, matches, inertia_preserved, sig_preserved })
}

//! Central tolerance configuration.
//!
//! Every numerical threshold used by the library lives here so tests and the
//! CLI can tighten or loosen all of them uniformly.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ToleranceConfig {
    /// Relative pivot threshold for LU solves.
    pub pivot_rel: f64,
    /// Relative hermiticity threshold for `herm_eig`.
    pub hermitian_rel: f64,
    /// Relative rank threshold for frames and kernels.
    pub rank: f64,
    /// Idempotency target for Riesz projections.
    pub riesz: f64,
    /// Half-width of the band around the real axis / unit circle.
    pub eps_region: f64,
    /// Relative clustering radius (scaled by 1 + spectral radius).
    pub cluster_rel: f64,
    /// Minimum distance between a contour and the spectrum.
    pub contour_gap: f64,
    /// Degeneracy threshold for Krein forms.
    pub zero: f64,
    /// Membership tolerance for J-unitary / J-hermitian checks.
    pub membership: f64,
    /// Membership tolerance along sampled paths.
    pub path: f64,
    /// Eigenvalue matching tolerance (reflections, Cayley transport).
    pub matching: f64,
    /// Special-point tolerance for bifurcation classification.
    pub special_point: f64,
    /// Minimum step for adaptive path tracking.
    pub min_step: f64,
    /// Distance below which a Cayley resolvent point counts as spectral.
    pub cayley_gap: f64,
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        ToleranceConfig {
            pivot_rel: 1e-13,
            hermitian_rel: 1e-10,
            rank: 1e-8,
            riesz: 1e-8,
            eps_region: 1e-7,
            cluster_rel: 1e-6,
            contour_gap: 1e-9,
            zero: 1e-8,
            membership: 1e-8,
            path: 1e-7,
            matching: 1e-6,
            special_point: 1e-6,
            min_step: 1e-6,
            cayley_gap: 1e-8,
        }
    }
}

impl ToleranceConfig {
    /// Multiplies every tolerance by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        ToleranceConfig {
            pivot_rel: self.pivot_rel * factor,
            hermitian_rel: self.hermitian_rel * factor,
            rank: self.rank * factor,
            riesz: self.riesz * factor,
            eps_region: self.eps_region * factor,
            cluster_rel: self.cluster_rel * factor,
            contour_gap: self.contour_gap * factor,
            zero: self.zero * factor,
            membership: self.membership * factor,
            path: self.path * factor,
            matching: self.matching * factor,
            special_point: self.special_point * factor,
            min_step: self.min_step * factor,
            cayley_gap: self.cayley_gap * factor,
        }
    }

    /// Reads `KREINLAB_TOL` as a scale factor; falls back to the defaults.
    pub fn from_env() -> Self {
        match std::env::var("KREINLAB_TOL").ok().and_then(|s| s.trim().parse::<f64>().ok()) {
            Some(f) if f.is_finite() && f > 0.0 => Self::default().scaled(f),
            _ => Self::default(),
        }
    }
}

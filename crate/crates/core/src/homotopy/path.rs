//! Operator paths t ↦ A(t) with membership checks.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::cayley::{cayley_inv_op, cayley_op, CayleyParams};
use crate::error::{KreinError, Result};
use crate::krein::{random_j_hermitian, KreinStructure};
use crate::numerics::{eigenvalues, matrix_exp, CMat, C64, I};
use crate::realsym::{is_member, random_member, RealStructure};
use crate::signature::membership_residual;
use crate::spectral::OperatorKind;
use crate::tolerance::ToleranceConfig;

pub type Sampler = Arc<dyn Fn(f64) -> Result<CMat> + Send + Sync>;

#[derive(Clone)]
pub struct OperatorPath {
    sampler: Sampler,
    pub krein: KreinStructure,
    pub real: Option<RealStructure>,
    pub kind: OperatorKind,
    pub t_start: f64,
    pub t_end: f64,
}

impl std::fmt::Debug for OperatorPath {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("OperatorPath")
            .field("krein", &self.krein)
            .field("real", &self.real.as_ref().map(|r| r.kind))
            .field("kind", &self.kind)
            .field("t_start", &self.t_start)
            .field("t_end", &self.t_end)
            .finish()
    }
}

impl OperatorPath {
    pub fn new(
        kind: OperatorKind,
        krein: KreinStructure,
        real: Option<RealStructure>,
        t_start: f64,
        t_end: f64,
        f: impl Fn(f64) -> Result<CMat> + Send + Sync + 'static,
    ) -> Self {
        OperatorPath { sampler: Arc::new(f), krein, real, kind, t_start, t_end }
    }

    /// Raw sample without membership checks.
    pub fn evaluate(&self, t: f64) -> Result<CMat> {
        (self.sampler)(t)
    }

    /// Largest of the J-membership residual and (if present) the Real
    /// symmetry residual.
    pub fn membership(&self, a: &CMat) -> Result<f64> {
        let mut res = membership_residual(a, &self.krein, self.kind)?;
        if let Some(rs) = &self.real {
            res = res.max(is_member(a, rs, self.kind, 0.0)?.1);
        }
        Ok(res)
    }

    /// Sample with membership check at `tol.path`, relative to ‖A‖²
    /// (unitary) or ‖A‖ (hermitian) once these exceed 1.
    pub fn sample(&self, t: f64, tol: &ToleranceConfig) -> Result<CMat> {
        let a = self.evaluate(t)?;
        let res = self.membership(&a)?;
        let nrm = a.norm().max(1.0);
        let scale = match self.kind {
            OperatorKind::Unitary => nrm * nrm,
            OperatorKind::Hermitian => nrm,
        };
        if !(res <= tol.path * scale) {
            return Err(KreinError::PathMembership { t, residual: res });
        }
        Ok(a)
    }

    /// The same path traversed backwards, on the same parameter interval.
    pub fn reversed(&self) -> OperatorPath {
        let f = self.sampler.clone();
        let (a, b) = (self.t_start, self.t_end);
        OperatorPath { sampler: Arc::new(move |t| f(a + b - t)), ..self.clone() }
    }

    /// Path through stored samples. Hermitian samples are interpolated
    /// linearly; unitary samples through a common Cayley chart (ζ ∈ {±1}
    /// when a Real structure is present, so that the chart respects it).
    pub fn from_samples(
        kind: OperatorKind,
        krein: KreinStructure,
        real: Option<RealStructure>,
        ts: Vec<f64>,
        mats: Vec<CMat>,
        tol: &ToleranceConfig,
    ) -> Result<OperatorPath> {
        if ts.len() < 2 || ts.len() != mats.len() {
            return Err(KreinError::InvalidInput("need at least two samples with matching times".into()));
        }
        if ts.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(KreinError::InvalidInput("sample times must increase".into()));
        }
        let (t_start, t_end) = (ts[0], *ts.last().unwrap());
        let (chart, params) = match kind {
            OperatorKind::Hermitian => (mats, None),
            OperatorKind::Unitary => {
                let mut spectra = Vec::new();
                for m in &mats {
                    spectra.extend(eigenvalues(m)?);
                }
                let candidates: Vec<C64> = if real.is_some() {
                    vec![C64::new(1.0, 0.0), C64::new(-1.0, 0.0)]
                } else {
                    (0..16).map(|k| C64::from_polar(1.0, 2.0 * PI * k as f64 / 16.0)).collect()
                };
                let zeta = candidates
                    .iter()
                    .copied()
                    .max_by(|a, b| {
                        let da = spectra.iter().map(|e| (e - a).norm()).fold(f64::INFINITY, f64::min);
                        let db = spectra.iter().map(|e| (e - b).norm()).fold(f64::INFINITY, f64::min);
                        da.partial_cmp(&db).unwrap()
                    })
                    .unwrap();
                let p = CayleyParams::new(I, zeta)?;
                let hs = mats.iter().map(|m| cayley_inv_op(m, &krein, &p, tol)).collect::<Result<Vec<_>>>()?;
                (hs, Some(p))
            }
        };
        let tol = *tol;
        Ok(OperatorPath::new(kind, krein, real, t_start, t_end, move |t| {
            let t = t.clamp(t_start, t_end);
            let k = match ts.iter().position(|&x| x > t) {
                Some(0) => 0,
                Some(k) => k - 1,
                None => ts.len() - 2,
            };
            let s = (t - ts[k]) / (ts[k + 1] - ts[k]);
            let h = chart[k].scale_re(1.0 - s) + chart[k + 1].scale_re(s);
            match &params {
                None => Ok(h),
                Some(p) => cayley_op(&h, &krein, p, &tol),
            }
        }))
    }

    /// Straight-line path of hermitians H_t = (1−t)H₀ + tH₁, or of unitaries
    /// exp(i·H_t), on t ∈ [0, 1].
    pub fn interpolated(kind: OperatorKind, krein: KreinStructure, real: Option<RealStructure>, h0: CMat, h1: CMat) -> OperatorPath {
        OperatorPath::new(kind, krein, real, 0.0, 1.0, move |t| {
            let h = h0.scale_re(1.0 - t) + h1.scale_re(t);
            Ok(match kind {
                OperatorKind::Hermitian => h,
                OperatorKind::Unitary => matrix_exp(&h.scale(I)),
            })
        })
    }

    /// Random member path: endpoints are random (Real-symmetrized)
    /// J-hermitians scaled by `scale`.
    pub fn random_member_path(kind: OperatorKind, krein: KreinStructure, real: Option<RealStructure>, seed: u64, scale: f64) -> OperatorPath {
        let gen = |s: u64| match &real {
            Some(rs) => random_member(rs, OperatorKind::Hermitian, s).scale_re(scale),
            None => random_j_hermitian(&krein, s).scale_re(scale),
        };
        let h0 = gen(seed.wrapping_mul(2).wrapping_add(1));
        let h1 = gen(seed.wrapping_mul(2).wrapping_add(2));
        OperatorPath::interpolated(kind, krein, real, h0, h1)
    }
}

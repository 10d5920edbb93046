//! Deformation retractions of J-hermitian operators onto model operators:
//! spectral flattening, kernel lifting, Lagrangian frames, straightening and
//! a final deformation of the Fredholm block to its class model.

mod frames;
mod stages;
mod unitary;

use serde::{Deserialize, Serialize};

pub use stages::{
    block_decompose, graph_frame, half_plane_projections, lagrangian_frames, lift_kernel, projections_from_unitaries, special_operator, spectral_flatten,
    straighten, unitary_class, BlockDecomposition, Flattening, LagrangianFrames, Lifting, StraightenSymmetry, Straightening,
};
pub use unitary::{
    class_projection, class_residual, factorization_residual, factorize_unitary, factorize_unitary_any, gap_to_one, log_largest_gap, log_with_cut,
    model_path, odd_s, quaternionic_s, unitarity_residual, MatrixClass, ModelPath, UnitaryClass,
};

use crate::error::{KreinError, Result};
use crate::homotopy::OperatorPath;
use crate::io::MatrixData;
use crate::krein::{make_standard, KreinStructure};
use crate::numerics::{eigenvalues, CMat, C64};
use crate::realsym::{make_real_structure, RealKind, RealStructure};
use crate::signature::{global_signature, sig2, InertiaPair};
use crate::spectral::OperatorKind;
use crate::tolerance::ToleranceConfig;

/// Uniform samples per segment for the membership and continuity checks.
pub const STAGE_SAMPLES: usize = 17;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StageLabel {
    Flatten,
    Lift,
    Straighten,
    Final,
}

impl StageLabel {
    pub fn as_str(&self) -> &'static str {
        match self {
            StageLabel::Flatten => "flatten",
            StageLabel::Lift => "lift",
            StageLabel::Straighten => "straighten",
            StageLabel::Final => "final",
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StageDiagnostics {
    pub stage: StageLabel,
    pub samples: usize,
    /// Largest membership residual over the samples, relative to max(1, ‖A‖).
    pub max_membership: f64,
    /// ‖A(0) − end of the previous segment‖ (0 for the first segment).
    pub start_gap: f64,
    pub end_sig: i64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub min_certificate: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct Segment {
    pub stage: StageLabel,
    /// Path on the full space.
    pub path: OperatorPath,
    pub diagnostics: StageDiagnostics,
}

#[derive(Debug, Clone)]
pub struct TerminalData {
    pub p_plus: CMat,
    pub p_minus: CMat,
    pub u_plus: CMat,
    /// Fredholm block of H‴ = i[[0, A*], [A, 0]], i.e. A = u₊*.
    pub a: CMat,
    pub class: MatrixClass,
    pub class_residual: f64,
    /// Endpoint of the final stage, u₊ deformed inside its class.
    pub model_u: CMat,
    /// max over σ(terminal) of the distance to {−i, 0, i}.
    pub spectrum_residual: f64,
}

#[derive(Debug, Clone)]
pub struct RetractionTrace {
    pub krein: KreinStructure,
    pub real_kind: Option<RealKind>,
    pub segments: Vec<Segment>,
    pub initial: CMat,
    /// H‴ on the full space (end of straightening).
    pub straightened: CMat,
    /// End of the final stage.
    pub terminal: CMat,
    pub terminal_data: TerminalData,
    pub sig_initial: i64,
    pub sig_terminal: i64,
    /// Sig₂ at both ends, kind (−1,−1) only.
    pub sig2: Option<(u8, u8)>,
    /// The lift left a kernel of inertia (1,1) and the remaining stages ran
    /// on its J-orthogonal complement.
    pub reduced: bool,
    pub lift_kernel: InertiaPair,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TraceCheck {
    pub ok: bool,
    pub max_gap: f64,
    pub max_membership: f64,
    pub sig_preserved: bool,
    pub class_ok: bool,
    pub spectrum_ok: bool,
    pub failures: Vec<String>,
}

impl RetractionTrace {
    /// Checks the trace invariants: continuity (1e−7), membership (1e−7),
    /// Sig preservation, terminal class (1e−8) and terminal spectrum (1e−6).
    pub fn check(&self) -> TraceCheck {
        let max_gap = self.segments.iter().map(|s| s.diagnostics.start_gap).fold(0.0, f64::max);
        let max_membership = self.segments.iter().map(|s| s.diagnostics.max_membership).fold(0.0, f64::max);
        let sig_preserved = self.sig_initial == self.sig_terminal && self.sig2.map_or(true, |(a, b)| a == b);
        let class_ok = self.terminal_data.class_residual <= 1e-8;
        let spectrum_ok = self.terminal_data.spectrum_residual <= 1e-6;
        let mut failures = Vec::new();
        if !(max_gap <= 1e-7) {
            failures.push(format!("segment gap {max_gap:.3e}"));
        }
        if !(max_membership <= 1e-7) {
            failures.push(format!("membership residual {max_membership:.3e}"));
        }
        if !sig_preserved {
            failures.push(format!("Sig {} -> {} (Sig2 {:?})", self.sig_initial, self.sig_terminal, self.sig2));
        }
        if !class_ok {
            failures.push(format!("terminal class residual {:.3e}", self.terminal_data.class_residual));
        }
        if !spectrum_ok {
            failures.push(format!("terminal spectrum residual {:.3e}", self.terminal_data.spectrum_residual));
        }
        TraceCheck { ok: failures.is_empty(), max_gap, max_membership, sig_preserved, class_ok, spectrum_ok, failures }
    }

    pub fn to_json(&self) -> serde_json::Value {
        let td = &self.terminal_data;
        serde_json::json!({
            "n_plus": self.krein.n_plus,
            "n_minus": self.krein.n_minus,
            "kind": self.real_kind.map(|k| [k.eta, k.tau]),
            "stages": self.segments.iter().map(|s| &s.diagnostics).collect::<Vec<_>>(),
            "reduced": self.reduced,
            "lift_kernel": self.lift_kernel,
            "sig_initial": self.sig_initial,
            "sig_terminal": self.sig_terminal,
            "sig2": self.sig2,
            "initial": MatrixData::from(&self.initial),
            "terminal": MatrixData::from(&self.terminal),
            "terminal_a": MatrixData::from(&td.a),
            "terminal_class": td.class.as_str(),
            "class_residual": td.class_residual,
            "spectrum_residual": td.spectrum_residual,
            "u_plus": MatrixData::from(&td.u_plus),
            "model_u": MatrixData::from(&td.model_u),
            "check": self.check(),
        })
    }
}

fn sig_of(h: &CMat, k: &KreinStructure, tol: &ToleranceConfig) -> Result<i64> {
    Ok(global_signature(h, k, OperatorKind::Hermitian, tol)?.sig)
}

fn diagnose(stage: StageLabel, path: &OperatorPath, prev_end: Option<&CMat>, tol: &ToleranceConfig) -> Result<(StageDiagnostics, CMat)> {
    let mut max_membership = 0.0f64;
    let mut start = None;
    let mut end = None;
    for i in 0..STAGE_SAMPLES {
        let t = path.t_start + (path.t_end - path.t_start) * i as f64 / (STAGE_SAMPLES - 1) as f64;
        let a = path.evaluate(t)?;
        max_membership = max_membership.max(path.membership(&a)? / a.norm().max(1.0));
        if i == 0 {
            start = Some(a.clone());
        }
        end = Some(a);
    }
    let (start, end) = (start.unwrap(), end.unwrap());
    let start_gap = prev_end.map_or(0.0, |p| start.dist(p) / p.norm().max(1.0));
    let end_sig = sig_of(&end, &path.krein, tol)?;
    Ok((StageDiagnostics { stage, samples: STAGE_SAMPLES, max_membership, start_gap, end_sig, min_certificate: None }, end))
}

/// Path on the full space through the embedding A ↦ Φ·A·L.
fn embedded(path: &OperatorPath, phi: &CMat, l: &CMat, k: KreinStructure, rs: Option<RealStructure>) -> OperatorPath {
    let (p, phi, l) = (path.clone(), phi.clone(), l.clone());
    OperatorPath::new(OperatorKind::Hermitian, k, rs, path.t_start, path.t_end, move |t| Ok(&phi * p.evaluate(t)? * &l))
}

fn spectrum_residual(h: &CMat) -> Result<f64> {
    let targets = [C64::new(0.0, 1.0), C64::new(0.0, -1.0), C64::new(0.0, 0.0)];
    Ok(eigenvalues(h)?.iter().map(|z| targets.iter().map(|w| (z - w).norm()).fold(f64::INFINITY, f64::min)).fold(0.0, f64::max))
}

/// Runs flatten → lift → (reduction) → Lagrangian frames → straighten →
/// final class deformation. Requires N₊ = N₋.
pub fn retract_to_model(h: &CMat, k: &KreinStructure, rs: Option<&RealStructure>, tol: &ToleranceConfig) -> Result<RetractionTrace> {
    if k.n_plus != k.n_minus {
        return Err(KreinError::InvalidInput(format!("retraction needs N+ = N- (got {}, {})", k.n_plus, k.n_minus)));
    }
    let kind = rs.map(|r| r.kind);
    let sig_initial = sig_of(h, k, tol).map_err(|e| e.at_stage("flatten"))?;
    let mut segments = Vec::new();
    let mut push = |stage: StageLabel, path: OperatorPath, prev: Option<&CMat>, cert: Option<f64>| -> Result<CMat> {
        let (mut d, end) = diagnose(stage, &path, prev, tol).map_err(|e| e.at_stage(stage.as_str()))?;
        d.min_certificate = cert;
        segments.push(Segment { stage, path, diagnostics: d });
        Ok(end)
    };

    let fl = spectral_flatten(h, k, rs, tol).map_err(|e| e.at_stage("flatten"))?;
    let end = push(StageLabel::Flatten, fl.path.clone(), Some(h), None)?;
    let lf = lift_kernel(&fl.flat, k, rs, tol).map_err(|e| e.at_stage("lift"))?;
    let end = push(StageLabel::Lift, lf.path.clone(), Some(&end), None)?;

    // reduction to the complement of a residual (1,1) kernel
    let reduced = lf.kernel_dim > 0;
    if reduced && lf.kernel_dim == k.dim() {
        // nothing left to straighten: the model is the kernel itself
        return kernel_only_trace(h, k, rs, segments, end, sig_initial, lf.kernel_inertia, tol);
    }
    let (work_h, work_k, work_rs, embed) = if reduced {
        let rs = match rs {
            Some(r) if r.kind == RealKind::new(-1, -1) => r,
            _ => return Err(KreinError::FramePreparationFailed("kernel left after the lift".into()).at_stage("lift")),
        };
        let (phi, l) = stages::reduce_off_kernel(&lf.kernel_frame, k, rs).map_err(|e| e.at_stage("lift"))?;
        let m = phi.cols() / 2;
        let kr = make_standard(m, m);
        let rr = make_real_structure(RealKind::new(-1, -1), m, m).map_err(|e| e.at_stage("lift"))?;
        (&l * &lf.lifted * &phi, kr, Some(rr), Some((phi, l)))
    } else {
        (lf.lifted.clone(), *k, rs.cloned(), None)
    };
    let lift_full = |p: &OperatorPath| match &embed {
        Some((phi, l)) => embedded(p, phi, l, *k, rs.cloned()),
        None => p.clone(),
    };

    let lag = lagrangian_frames(&work_h, &work_k, work_rs.as_ref(), tol).map_err(|e| e.at_stage("straighten"))?;
    let sym = StraightenSymmetry::for_kind(kind);
    let st = straighten(&lag.u_plus, &lag.u_minus, sym, work_rs.as_ref(), tol).map_err(|e| e.at_stage("straighten"))?;
    let straightened = push(StageLabel::Straighten, lift_full(&st.path), Some(&end), Some(st.min_certificate))?;

    let class = unitary_class(kind);
    let u_plus = lag.u_plus.clone();
    let a = u_plus.adjoint();
    let class_res = class_residual(&a, class).map_err(|e| e.at_stage("final"))?;
    let mp = model_path(&u_plus, class).map_err(|e| e.at_stage("final"))?;
    let up_path = mp.path.clone();
    let n = u_plus.rows();
    let fin = OperatorPath::new(OperatorKind::Hermitian, make_standard(n, n), work_rs.clone(), 0.0, 1.0, move |t| Ok(special_operator(&up_path(t))));
    let terminal = push(StageLabel::Final, lift_full(&fin), Some(&straightened), None)?;

    let sig_terminal = sig_of(&terminal, k, tol).map_err(|e| e.at_stage("final"))?;
    let sig2_pair = match rs {
        Some(r) if r.kind == RealKind::new(-1, -1) => {
            let a0 = sig2(h, r, OperatorKind::Hermitian, tol).map_err(|e| e.at_stage("flatten"))?;
            let a1 = sig2(&terminal, r, OperatorKind::Hermitian, tol).map_err(|e| e.at_stage("final"))?;
            Some((a0, a1))
        }
        _ => None,
    };
    let terminal_data = TerminalData {
        p_plus: st.p_plus_end.clone(),
        p_minus: st.p_minus_end.clone(),
        u_plus,
        a,
        class,
        class_residual: class_res,
        model_u: mp.model,
        spectrum_residual: spectrum_residual(&terminal).map_err(|e| e.at_stage("final"))?,
    };
    Ok(RetractionTrace {
        krein: *k,
        real_kind: kind,
        segments,
        initial: h.clone(),
        straightened,
        terminal,
        terminal_data,
        sig_initial,
        sig_terminal,
        sig2: sig2_pair,
        reduced,
        lift_kernel: lf.kernel_inertia,
    })
}

#[allow(clippy::too_many_arguments)]
fn kernel_only_trace(
    h: &CMat,
    k: &KreinStructure,
    rs: Option<&RealStructure>,
    segments: Vec<Segment>,
    end: CMat,
    sig_initial: i64,
    lift_kernel: InertiaPair,
    tol: &ToleranceConfig,
) -> Result<RetractionTrace> {
    let sig_terminal = sig_of(&end, k, tol).map_err(|e| e.at_stage("lift"))?;
    let sig2_pair = match rs {
        Some(r) => Some((
            sig2(h, r, OperatorKind::Hermitian, tol).map_err(|e| e.at_stage("flatten"))?,
            sig2(&end, r, OperatorKind::Hermitian, tol).map_err(|e| e.at_stage("lift"))?,
        )),
        None => None,
    };
    let empty = CMat::zeros(0, 0);
    let terminal_data = TerminalData {
        p_plus: empty.clone(),
        p_minus: empty.clone(),
        u_plus: empty.clone(),
        a: empty.clone(),
        class: unitary_class(rs.map(|r| r.kind)),
        class_residual: 0.0,
        model_u: empty,
        spectrum_residual: spectrum_residual(&end).map_err(|e| e.at_stage("lift"))?,
    };
    Ok(RetractionTrace {
        krein: *k,
        real_kind: rs.map(|r| r.kind),
        segments,
        initial: h.clone(),
        straightened: end.clone(),
        terminal: end,
        terminal_data,
        sig_initial,
        sig_terminal,
        sig2: sig2_pair,
        reduced: true,
        lift_kernel,
    })
}

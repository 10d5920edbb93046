//! Command implementations behind the `kreinlab` binary.
//!
//! Every command is a plain function returning serializable data; the binary
//! only parses arguments, writes files and maps errors to exit codes.

pub mod verify;

use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{KreinError, Result};
use crate::homotopy::{
    analyze, events_match, scenario_library, verify_krein_stability, BifurcationEvent, ExpectedEvent, OperatorPath, ScenarioParams, TrackOptions, SCENARIOS,
};
use crate::io::{MatrixData, MatrixFile};
use crate::krein::{make_standard, random_j_hermitian, random_j_unitary, KreinStructure};
use crate::numerics::CMat;
use crate::realsym::{classify_group, full_invariant_report, is_member, make_real_structure, random_member, RealKind, RealStructure};
use crate::retraction::{retract_to_model, RetractionTrace};
use crate::signature::{global_signature, membership_residual, InvariantReport};
use crate::spectral::OperatorKind;
use crate::tolerance::ToleranceConfig;

pub use verify::{run_suite, VerifySummary, SUITES};

pub const EXIT_VERIFY: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_DEGENERATE: i32 = 3;
pub const EXIT_TRACKING: i32 = 4;
pub const EXIT_RETRACTION: i32 = 5;

/// Help text listing the exit codes.
pub const EXIT_CODES_HELP: &str = "Exit codes:
  0  success
  1  verification failure
  2  invalid input (file format, dimensions, unknown scenario or suite)
  3  degenerate or ambiguous spectral data
  4  path tracking failure
  5  retraction stage failure (the stage is named in the message)

Environment:
  KREINLAB_TOL  positive factor scaling every tolerance uniformly";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Gen,
    Invariants,
    Track,
    Retract,
    Verify,
}

pub fn exit_code(cmd: Command, e: &KreinError) -> i32 {
    use KreinError::*;
    match e {
        InvalidInput(_) | DimensionMismatch { .. } | IncompatibleDimensions { .. } | Io(_) | UnknownScenario(_) | InvalidCayleyParams(_) => EXIT_INPUT,
        Stage { .. } => EXIT_RETRACTION,
        DegenerateForm { .. } | AmbiguousClassification { .. } | SingularForm { .. } | DegenerateSubspace { .. } => EXIT_DEGENERATE,
        StepUnderflow { .. } | UnresolvedEvent { .. } => EXIT_TRACKING,
        FixtureMismatch { .. } => EXIT_VERIFY,
        _ => match cmd {
            Command::Gen => EXIT_INPUT,
            Command::Invariants => EXIT_DEGENERATE,
            Command::Track => EXIT_TRACKING,
            Command::Retract => EXIT_RETRACTION,
            Command::Verify => EXIT_VERIFY,
        },
    }
}

/// Classes accepted by `gen`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GenClass {
    /// O(N₊,N₋): kind (1,1).
    O,
    /// SO*(2n): kind (−1,−1).
    SoStar,
    /// SP(N₊,N₋): kind (−1,1).
    SpInd,
    /// SP(2n,ℝ): kind (1,−1).
    SpR,
    /// U(N₊,N₋) without Real structure.
    U,
    /// J-hermitian, optionally Real via `--real`.
    Hermitian,
}

impl FromStr for GenClass {
    type Err = KreinError;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "O" => GenClass::O,
            "SO*" => GenClass::SoStar,
            "SP-ind" => GenClass::SpInd,
            "SP-R" => GenClass::SpR,
            "U" => GenClass::U,
            "hermitian" => GenClass::Hermitian,
            _ => return Err(KreinError::InvalidInput(format!("unknown class `{s}` (expected O, SO*, SP-ind, SP-R, U or hermitian)"))),
        })
    }
}

impl GenClass {
    pub fn real_kind(&self) -> Option<RealKind> {
        match self {
            GenClass::O => Some(RealKind::new(1, 1)),
            GenClass::SoStar => Some(RealKind::new(-1, -1)),
            GenClass::SpInd => Some(RealKind::new(-1, 1)),
            GenClass::SpR => Some(RealKind::new(1, -1)),
            GenClass::U | GenClass::Hermitian => None,
        }
    }

    pub fn operator_kind(&self) -> OperatorKind {
        match self {
            GenClass::Hermitian => OperatorKind::Hermitian,
            _ => OperatorKind::Unitary,
        }
    }
}

/// Membership residuals of a generated operator.
#[derive(Debug, Clone, Serialize)]
pub struct GenReport {
    pub group: String,
    pub operator: OperatorKind,
    pub kind: Option<[i64; 2]>,
    pub krein_residual: f64,
    pub real_residual: Option<f64>,
}

fn kind_array(k: RealKind) -> [i64; 2] {
    [k.eta as i64, k.tau as i64]
}

fn real_from_file(kind: Option<[i64; 2]>, n_plus: usize, n_minus: usize) -> Result<Option<RealStructure>> {
    kind.map(|[eta, tau]| make_real_structure(RealKind::try_new(eta, tau)?, n_plus, n_minus)).transpose()
}

/// Random element of the class (or H = 0 with `zero`). `real` attaches a
/// Real kind to hermitian output.
pub fn cmd_gen(class: GenClass, n_plus: usize, n_minus: usize, seed: u64, zero: bool, real: Option<RealKind>) -> Result<(MatrixFile, GenReport)> {
    if n_plus + n_minus == 0 {
        return Err(KreinError::InvalidInput("dimension must be positive".into()));
    }
    if real.is_some() && class != GenClass::Hermitian {
        return Err(KreinError::InvalidInput("--real applies to the hermitian class only".into()));
    }
    if zero && class != GenClass::Hermitian {
        return Err(KreinError::InvalidInput("--zero applies to the hermitian class only".into()));
    }
    let kind = class.real_kind().or(real);
    let op = class.operator_kind();
    let k = make_standard(n_plus, n_minus);
    let rs = kind.map(|kd| make_real_structure(kd, n_plus, n_minus)).transpose()?;
    let a = match (&rs, zero) {
        (_, true) => CMat::zeros(n_plus + n_minus, n_plus + n_minus),
        (Some(rs), false) => random_member(rs, op, seed),
        (None, false) => match op {
            OperatorKind::Unitary => random_j_unitary(&k, seed),
            OperatorKind::Hermitian => random_j_hermitian(&k, seed),
        },
    };
    let real_residual = rs.as_ref().map(|rs| is_member(&a, rs, op, f64::INFINITY).map(|r| r.1)).transpose()?;
    let report = GenReport {
        group: classify_group(rs.as_ref(), &k).name,
        operator: op,
        kind: kind.map(kind_array),
        krein_residual: membership_residual(&a, &k, op)?,
        real_residual,
    };
    Ok((MatrixFile::new(&a, n_plus, n_minus, kind.map(kind_array)), report))
}

/// Relative membership threshold applied to input files.
const INPUT_MEMBERSHIP: f64 = 1e-6;

fn check_input_membership(a: &CMat, k: &KreinStructure, rs: Option<&RealStructure>, op: OperatorKind) -> Result<()> {
    let scale = a.norm().max(1.0);
    let res = membership_residual(a, k, op)? / scale;
    let name = match op {
        OperatorKind::Unitary => "J-unitary",
        OperatorKind::Hermitian => "J-hermitian",
    };
    if !(res <= INPUT_MEMBERSHIP) {
        return Err(KreinError::InvalidInput(format!("operator is not {name} (relative residual {res:.3e})")));
    }
    if let Some(rs) = rs {
        let (_, r) = is_member(a, rs, op, f64::INFINITY)?;
        if !(r / scale <= INPUT_MEMBERSHIP) {
            return Err(KreinError::InvalidInput(format!("operator violates the Real symmetry of kind {} (relative residual {:.3e})", rs.kind, r / scale)));
        }
    }
    Ok(())
}

/// Operator kind with the smaller membership residual (Real symmetry
/// included); ties go to unitary.
pub fn infer_kind(a: &CMat, k: &KreinStructure, rs: Option<&RealStructure>) -> Result<OperatorKind> {
    let res = |op| -> Result<f64> {
        let r = membership_residual(a, k, op)?;
        Ok(match rs {
            Some(rs) => r.max(is_member(a, rs, op, f64::INFINITY)?.1),
            None => r,
        })
    };
    let (u, h) = (res(OperatorKind::Unitary)?, res(OperatorKind::Hermitian)?);
    Ok(if u <= h { OperatorKind::Unitary } else { OperatorKind::Hermitian })
}

/// Invariant report of the operator in `file`; the kind-specific invariants
/// are added when the file declares a Real kind.
pub fn cmd_invariants(file: &MatrixFile, kind: Option<OperatorKind>, tol: &ToleranceConfig) -> Result<InvariantReport> {
    let a = file.matrix()?;
    let k = make_standard(file.n_plus, file.n_minus);
    let rs = real_from_file(file.kind, file.n_plus, file.n_minus)?;
    let op = match kind {
        Some(op) => op,
        None => infer_kind(&a, &k, rs.as_ref())?,
    };
    check_input_membership(&a, &k, rs.as_ref(), op)?;
    match &rs {
        Some(rs) => full_invariant_report(&a, rs, op, tol),
        None => global_signature(&a, &k, op, tol),
    }
}

/// Path through sampled operators (linear in a common chart).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathFile {
    pub n_plus: usize,
    pub n_minus: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<[i64; 2]>,
    pub operator: OperatorKind,
    pub times: Vec<f64>,
    /// Row-major entries of each sample.
    pub samples: Vec<Vec<[f64; 2]>>,
}

impl PathFile {
    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| KreinError::InvalidInput(format!("path file: {e}")))
    }

    pub fn to_path(&self, tol: &ToleranceConfig) -> Result<OperatorPath> {
        let n = self.n_plus + self.n_minus;
        let k = make_standard(self.n_plus, self.n_minus);
        let rs = real_from_file(self.kind, self.n_plus, self.n_minus)?;
        let mats = self.samples.iter().map(|e| MatrixData { rows: n, cols: n, entries: e.clone() }.to_cmat()).collect::<Result<Vec<_>>>()?;
        for m in &mats {
            check_input_membership(m, &k, rs.as_ref(), self.operator)?;
        }
        OperatorPath::from_samples(self.operator, k, rs, self.times.clone(), mats, tol)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TrackOutput {
    pub source: String,
    pub events: Vec<BifurcationEvent>,
    /// Expected library events, for scenarios.
    pub expected: Option<Vec<ExpectedEvent>>,
    pub matches_expected: Option<bool>,
    pub krein_stable: bool,
    #[serde(skip)]
    pub csv: String,
}

fn track_path(source: String, path: &OperatorPath, expected: Option<Vec<ExpectedEvent>>, grid: usize, tol: &ToleranceConfig) -> Result<TrackOutput> {
    let opts = TrackOptions { initial_grid: grid, ..TrackOptions::default() };
    let (tr, events) = analyze(path, &opts, tol)?;
    let matches_expected = expected.as_ref().map(|x| events_match(x, &events, 1e-3, 1e-3));
    let krein_stable = verify_krein_stability(&events).ok;
    Ok(TrackOutput { source, csv: tr.to_csv(), events, expected, matches_expected, krein_stable })
}

pub fn cmd_track_scenario(name: &str, params: &ScenarioParams, grid: usize, tol: &ToleranceConfig) -> Result<TrackOutput> {
    let sc = scenario_library(name, params)?;
    track_path(name.to_string(), &sc.path, Some(sc.expected), grid, tol)
}

pub fn cmd_track_file(file: &PathFile, source: &str, grid: usize, tol: &ToleranceConfig) -> Result<TrackOutput> {
    track_path(source.to_string(), &file.to_path(tol)?, None, grid, tol)
}

pub fn is_scenario(name: &str) -> bool {
    SCENARIOS.contains(&name)
}

/// Retraction of the J-hermitian operator in `file` to its model.
pub fn cmd_retract(file: &MatrixFile, tol: &ToleranceConfig) -> Result<RetractionTrace> {
    let a = file.matrix()?;
    let k = make_standard(file.n_plus, file.n_minus);
    let rs = real_from_file(file.kind, file.n_plus, file.n_minus)?;
    check_input_membership(&a, &k, rs.as_ref(), OperatorKind::Hermitian)?;
    retract_to_model(&a, &k, rs.as_ref(), tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::homotopy::{finex_matrix, EventKind};
    use crate::krein::is_j_unitary;

    fn tol() -> ToleranceConfig {
        ToleranceConfig::default()
    }

    #[test]
    fn gen_o_1_1_is_member() {
        let (f, rep) = cmd_gen(GenClass::O, 1, 1, 7, false, None).unwrap();
        let a = f.matrix().unwrap();
        // independent oracle: real entries and TᵀJT = J
        assert!(a.max_imag() < 1e-14);
        assert!(is_j_unitary(&a, &make_standard(1, 1), 1e-10).unwrap().0);
        assert_eq!(rep.group, "O(1,1)");
        assert!(rep.real_residual.unwrap() < 1e-12);
    }

    #[test]
    fn gen_u_2_2() {
        let (f, rep) = cmd_gen(GenClass::U, 2, 2, 1, false, None).unwrap();
        let a = f.matrix().unwrap();
        let j = make_standard(2, 2).j();
        assert!((a.adjoint() * &j * &a).dist(&j) < 1e-10);
        assert!(rep.krein_residual < 1e-10);
        assert_eq!(f.kind, None);
    }

    #[test]
    fn gen_hermitian_zero() {
        let (f, _) = cmd_gen(GenClass::Hermitian, 1, 1, 0, true, None).unwrap();
        assert!(f.entries.iter().all(|e| e[0] == 0.0 && e[1] == 0.0));
    }

    #[test]
    fn gen_rejects_incompatible_dims() {
        for (class, p, q) in [(GenClass::SoStar, 2, 1), (GenClass::SpR, 1, 2), (GenClass::SpInd, 1, 1), (GenClass::U, 0, 0)] {
            let e = cmd_gen(class, p, q, 0, false, None).unwrap_err();
            assert_eq!(exit_code(Command::Gen, &e), EXIT_INPUT, "{class:?}");
        }
    }

    #[test]
    fn gen_round_trip_is_exact() {
        let (f, _) = cmd_gen(GenClass::SoStar, 2, 2, 3, false, None).unwrap();
        let back = MatrixFile::from_json(&f.to_json()).unwrap();
        assert_eq!(back, f);
    }

    #[test]
    fn invariants_finex() {
        let a = finex_matrix(1.0, 1.0, 0.5);
        let f = MatrixFile::new(&a, 1, 1, Some([1, 1]));
        let rep = cmd_invariants(&f, None, &tol()).unwrap();
        assert_eq!(rep.kind, OperatorKind::Unitary);
        assert_eq!(rep.sig, 0);
        assert_eq!(rep.sec, Some(1));
        assert_eq!(rep.sig_at(crate::numerics::c(1.0, 0.0), 1e-6), 1);
        assert_eq!(rep.sig_at(crate::numerics::c(-1.0, 0.0), 1e-6), -1);
    }

    #[test]
    fn invariants_j_on_2_1() {
        let k = make_standard(2, 1);
        let f = MatrixFile::new(&k.j(), 2, 1, None);
        let rep = cmd_invariants(&f, Some(OperatorKind::Hermitian), &tol()).unwrap();
        assert_eq!(rep.sig, 1);
    }

    #[test]
    fn invariants_rejects_non_member() {
        let mut a = CMat::zeros(2, 2);
        a[(0, 1)] = crate::numerics::c(1.0, 0.0);
        let f = MatrixFile::new(&a, 1, 1, None);
        let e = cmd_invariants(&f, Some(OperatorKind::Hermitian), &tol()).unwrap_err();
        assert_eq!(exit_code(Command::Invariants, &e), EXIT_INPUT);
    }

    #[test]
    fn track_library_scenarios() {
        let out = cmd_track_scenario("finex", &ScenarioParams::default(), 21, &tol()).unwrap();
        assert!(out.events.is_empty());
        let out = cmd_track_scenario("kc2x2", &ScenarioParams::default(), 21, &tol()).unwrap();
        assert_eq!(out.events.len(), 1);
        assert_eq!(out.events[0].kind, EventKind::KC);
        assert!((out.events[0].t0 - 1.0).abs() <= 1e-4);
        assert!(out.csv.starts_with("t,track_id,"));
        let out = cmd_track_scenario("tb", &ScenarioParams::default(), 21, &tol()).unwrap();
        assert_eq!(out.events.len(), 1);
        assert_eq!(out.events[0].kind, EventKind::TB);
        assert_eq!(out.matches_expected, Some(true));
        assert!(matches!(cmd_track_scenario("nope", &ScenarioParams::default(), 21, &tol()), Err(KreinError::UnknownScenario(_))));
    }

    #[test]
    fn track_from_file() {
        let k = make_standard(1, 1);
        let h0 = random_j_hermitian(&k, 1);
        let h1 = random_j_hermitian(&k, 2);
        let pf = PathFile {
            n_plus: 1,
            n_minus: 1,
            kind: None,
            operator: OperatorKind::Hermitian,
            times: vec![0.0, 1.0],
            samples: vec![MatrixData::from(&h0).entries, MatrixData::from(&h1).entries],
        };
        let back = PathFile::from_json(&serde_json::to_string(&pf).unwrap()).unwrap();
        let out = cmd_track_file(&back, "file", 21, &tol()).unwrap();
        assert!(out.krein_stable);
        assert!(out.events.iter().all(|e| matches!(e.kind, EventKind::KC | EventKind::PassThrough)));
    }

    #[test]
    fn retract_j_trace() {
        let k = make_standard(1, 1);
        let f = MatrixFile::new(&k.j(), 1, 1, None);
        let tr = cmd_retract(&f, &tol()).unwrap();
        assert!(tr.check().ok);
        assert_eq!(tr.sig_initial, tr.sig_terminal);
    }

    #[test]
    fn retract_symmetric_kind_terminal() {
        let (f, _) = cmd_gen(GenClass::Hermitian, 2, 2, 5, false, Some(RealKind::new(1, -1))).unwrap();
        let tr = cmd_retract(&f, &tol()).unwrap();
        let a = &tr.terminal_data.a;
        assert!(a.dist(&a.transpose()) <= 1e-8);
    }

    #[test]
    fn retract_refuses_unbalanced() {
        let k = make_standard(2, 1);
        let f = MatrixFile::new(&k.j(), 2, 1, None);
        let e = cmd_retract(&f, &tol()).unwrap_err();
        assert_eq!(exit_code(Command::Retract, &e), EXIT_INPUT);
        assert!(e.to_string().contains("N+ = N-"));
    }

    #[test]
    fn exit_codes() {
        let stage = KreinError::NotGapped { distance: 0.0 }.at_stage("straighten");
        assert_eq!(exit_code(Command::Retract, &stage), EXIT_RETRACTION);
        assert!(stage.to_string().contains("straighten"));
        assert_eq!(exit_code(Command::Track, &KreinError::StepUnderflow { t_lo: 0.0, t_hi: 1.0 }), EXIT_TRACKING);
        assert_eq!(exit_code(Command::Invariants, &KreinError::AmbiguousClassification { lambda: crate::numerics::c(1.0, 0.0), distance: 0.0 }), EXIT_DEGENERATE);
        assert_eq!(exit_code(Command::Verify, &KreinError::NoConvergence { iterations: 1 }), EXIT_VERIFY);
    }

    #[test]
    fn gen_class_parsing() {
        for (s, c) in [("O", GenClass::O), ("SO*", GenClass::SoStar), ("SP-ind", GenClass::SpInd), ("SP-R", GenClass::SpR), ("U", GenClass::U), ("hermitian", GenClass::Hermitian)] {
            assert_eq!(s.parse::<GenClass>().unwrap(), c);
        }
        assert!("Sp".parse::<GenClass>().is_err());
    }
}

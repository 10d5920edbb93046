//! Worked-example fixtures: `fixtures/<name>/{input.json, expected.json, oracle.md}`.
//!
//! A fixture is recomputed from its input and compared with the stored
//! expectation; integer invariants must match exactly, event times and
//! eigenvalues within the fixture tolerance.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{KreinError, Result};
use crate::homotopy::{analyze, scenario_library, EventKind, ScenarioParams, TrackOptions};
use crate::io::{MatrixData, MatrixFile};
use crate::krein::make_standard;
use crate::numerics::{rank, C64};
use crate::realsym::{full_invariant_report, make_real_structure, RealKind};
use crate::signature::{build_index_example, global_signature, InvariantReport};
use crate::spectral::OperatorKind;
use crate::tolerance::ToleranceConfig;

/// Where a fixture's expectation comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Origin {
    /// A published worked example, restated in `statement`.
    Reference,
    /// Follows from the definitions.
    Trivial,
    /// Computed by the independent oracle described in `oracle.md`.
    Derived,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum FixtureInput {
    /// Invariant report of an operator.
    Invariants { operator: OperatorKind, matrix: MatrixFile },
    /// Sig(H) for H = i[[0, A*], [A, 0]], compared with the index of A.
    IndexExample { a: MatrixData },
    /// Events along a library scenario.
    Track {
        scenario: String,
        #[serde(default)]
        params: Option<ScenarioParams>,
        grid: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundarySig {
    pub lambda: [f64; 2],
    pub sig: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventSpec {
    pub kind: EventKind,
    pub t0: f64,
    pub lambda0: [f64; 2],
    pub multiplicity: usize,
}

/// Observed or expected values; absent fields are not compared.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FixtureValues {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sig: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sec: Option<u8>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sig2: Option<u8>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub index: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub boundary: Option<Vec<BoundarySig>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub events: Option<Vec<EventSpec>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixtureExpected {
    pub origin: Origin,
    pub statement: String,
    pub tolerance: f64,
    #[serde(flatten)]
    pub values: FixtureValues,
}

#[derive(Debug, Clone)]
pub struct Fixture {
    pub name: String,
    pub input: FixtureInput,
    pub expected: FixtureExpected,
    pub oracle: String,
}

/// `fixtures/` at the workspace root.
pub fn fixtures_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

pub fn list_fixtures(dir: &Path) -> Result<Vec<String>> {
    let rd = std::fs::read_dir(dir).map_err(|e| KreinError::Io(format!("{}: {e}", dir.display())))?;
    let mut names: Vec<String> = rd.filter_map(|e| e.ok()).filter(|e| e.path().is_dir()).map(|e| e.file_name().to_string_lossy().into_owned()).collect();
    names.sort();
    Ok(names)
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| KreinError::Io(format!("{}: {e}", path.display())))
}

fn parse<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    serde_json::from_str(&read(path)?).map_err(|e| KreinError::InvalidInput(format!("{}: {e}", path.display())))
}

pub fn load_fixture(dir: &Path, name: &str) -> Result<Fixture> {
    let base = dir.join(name);
    if !base.is_dir() {
        return Err(KreinError::InvalidInput(format!("no fixture `{name}` in {}", dir.display())));
    }
    Ok(Fixture {
        name: name.to_string(),
        input: parse(&base.join("input.json"))?,
        expected: parse(&base.join("expected.json"))?,
        oracle: read(&base.join("oracle.md"))?,
    })
}

fn report_values(rep: &InvariantReport) -> FixtureValues {
    let boundary = rep.clusters.iter().filter(|c| c.on_boundary).map(|c| BoundarySig { lambda: [c.eigenvalue.re, c.eigenvalue.im], sig: c.sig }).collect();
    FixtureValues { sig: Some(rep.sig), sec: rep.sec, sig2: rep.sig2, boundary: Some(boundary), ..Default::default() }
}

/// Recomputes the values of a fixture input.
pub fn compute(input: &FixtureInput, tol: &ToleranceConfig) -> Result<FixtureValues> {
    match input {
        FixtureInput::Invariants { operator, matrix } => {
            let a = matrix.matrix()?;
            let rep = match matrix.kind {
                Some([eta, tau]) => full_invariant_report(&a, &make_real_structure(RealKind::try_new(eta, tau)?, matrix.n_plus, matrix.n_minus)?, *operator, tol)?,
                None => global_signature(&a, &make_standard(matrix.n_plus, matrix.n_minus), *operator, tol)?,
            };
            Ok(report_values(&rep))
        }
        FixtureInput::IndexExample { a } => {
            let a = a.to_cmat()?;
            let (h, k) = build_index_example(&a);
            let rep = global_signature(&h, &k, OperatorKind::Hermitian, tol)?;
            let r = rank(&a, tol.rank) as i64;
            let index = (a.cols() as i64 - r) - (a.rows() as i64 - r);
            Ok(FixtureValues { sig: Some(rep.sig), index: Some(index), ..Default::default() })
        }
        FixtureInput::Track { scenario, params, grid } => {
            let sc = scenario_library(scenario, &params.unwrap_or_default())?;
            let opts = TrackOptions { initial_grid: *grid, ..TrackOptions::default() };
            let (_, events) = analyze(&sc.path, &opts, tol)?;
            let events = events.iter().map(|e| EventSpec { kind: e.kind, t0: e.t0, lambda0: [e.lambda0.re, e.lambda0.im], multiplicity: e.multiplicity }).collect();
            Ok(FixtureValues { events: Some(events), ..Default::default() })
        }
    }
}

fn near(a: [f64; 2], b: [f64; 2], tol: f64) -> bool {
    (C64::new(a[0], a[1]) - C64::new(b[0], b[1])).norm() <= tol
}

/// Differences between expected and observed values; empty on a match.
pub fn diff(expected: &FixtureValues, observed: &FixtureValues, tol: f64) -> Vec<String> {
    let mut out = Vec::new();
    fn exact<T: PartialEq + std::fmt::Debug>(out: &mut Vec<String>, name: &str, e: &Option<T>, o: &Option<T>) {
        if e.is_some() && e != o {
            out.push(format!("{name}: expected {e:?}, got {o:?}"));
        }
    }
    exact(&mut out, "sig", &expected.sig, &observed.sig);
    exact(&mut out, "sec", &expected.sec, &observed.sec);
    exact(&mut out, "sig2", &expected.sig2, &observed.sig2);
    exact(&mut out, "index", &expected.index, &observed.index);
    if let Some(eb) = &expected.boundary {
        let ob = observed.boundary.clone().unwrap_or_default();
        let ok = eb.len() == ob.len() && eb.iter().all(|x| ob.iter().any(|y| near(x.lambda, y.lambda, tol) && x.sig == y.sig));
        if !ok {
            out.push(format!("boundary: expected {eb:?}, got {ob:?}"));
        }
    }
    if let Some(ee) = &expected.events {
        let oe = observed.events.clone().unwrap_or_default();
        let ok = ee.len() == oe.len()
            && ee.iter().zip(&oe).all(|(x, y)| x.kind == y.kind && x.multiplicity == y.multiplicity && (x.t0 - y.t0).abs() <= tol && near(x.lambda0, y.lambda0, tol));
        if !ok {
            out.push(format!("events: expected {ee:?}, got {oe:?}"));
        }
    }
    out
}

/// Recomputes fixture `name` under `dir` and compares it with its expectation.
pub fn run_fixture_in(dir: &Path, name: &str, tol: &ToleranceConfig) -> Result<FixtureValues> {
    let fx = load_fixture(dir, name)?;
    let observed = compute(&fx.input, tol)?;
    let d = diff(&fx.expected.values, &observed, fx.expected.tolerance);
    if !d.is_empty() {
        let mut msg = String::new();
        for line in d {
            let _ = write!(msg, "{line}; ");
        }
        return Err(KreinError::FixtureMismatch { name: name.to_string(), diff: msg.trim_end_matches("; ").to_string() });
    }
    Ok(observed)
}

pub fn run_fixture(name: &str) -> Result<FixtureValues> {
    run_fixture_in(&fixtures_dir(), name, &ToleranceConfig::default())
}

/// Rewrites the computed values of `expected.json`, keeping origin,
/// statement and tolerance. Only for deliberate regeneration.
pub fn regenerate_fixture(dir: &Path, name: &str, tol: &ToleranceConfig) -> Result<()> {
    let fx = load_fixture(dir, name)?;
    let values = compute(&fx.input, tol)?;
    // keep the expectation's field selection
    let e = &fx.expected.values;
    let values = FixtureValues {
        sig: values.sig.filter(|_| e.sig.is_some()),
        sec: values.sec.filter(|_| e.sec.is_some()),
        sig2: values.sig2.filter(|_| e.sig2.is_some()),
        index: values.index.filter(|_| e.index.is_some()),
        boundary: values.boundary.filter(|_| e.boundary.is_some()),
        events: values.events.filter(|_| e.events.is_some()),
    };
    let out = FixtureExpected { values, ..fx.expected };
    let path = dir.join(name).join("expected.json");
    std::fs::write(&path, serde_json::to_string_pretty(&out).expect("serializable") + "\n").map_err(|e| KreinError::Io(format!("{}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diff_reports_mismatch() {
        let e = FixtureValues { sig: Some(1), ..Default::default() };
        let o = FixtureValues { sig: Some(0), sec: Some(1), ..Default::default() };
        assert_eq!(diff(&e, &o, 1e-6).len(), 1);
        assert!(diff(&e, &FixtureValues { sig: Some(1), ..Default::default() }, 1e-6).is_empty());
    }

    #[test]
    fn events_compared_with_tolerance() {
        let ev = |t0| EventSpec { kind: EventKind::KC, t0, lambda0: [0.0, 0.0], multiplicity: 2 };
        let e = FixtureValues { events: Some(vec![ev(1.0)]), ..Default::default() };
        assert!(diff(&e, &FixtureValues { events: Some(vec![ev(1.0 + 5e-5)]), ..Default::default() }, 1e-4).is_empty());
        assert!(!diff(&e, &FixtureValues { events: Some(vec![ev(1.0 + 5e-4)]), ..Default::default() }, 1e-4).is_empty());
        assert!(!diff(&e, &FixtureValues { events: Some(vec![]), ..Default::default() }, 1e-4).is_empty());
    }

    #[test]
    fn missing_fixture_is_input_error() {
        assert!(matches!(run_fixture("no-such-fixture"), Err(KreinError::InvalidInput(_))));
    }
}

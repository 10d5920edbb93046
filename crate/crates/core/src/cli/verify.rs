//! Randomized verification suites behind `kreinlab verify`.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::cayley::{transport_report, CayleyParams};
use crate::error::{KreinError, Result};
use crate::homotopy::{allowed_kinds, analyze, events_match, scenario_library, verify_krein_stability, EventKind, OperatorPath, ScenarioParams, TrackOptions, SCENARIOS};
use crate::krein::{make_standard, random_j_hermitian};
use crate::numerics::{c, matrix_exp, CMat, C64, I};
use crate::random::{complex_gaussian, rng, uniform, uniform_usize, unitary};
use crate::realsym::{kramers_check, make_real_structure, random_member, symmetrize_hermitian, RealKind, RealStructure};
use crate::retraction::{factorization_residual, factorize_unitary, gap_to_one, odd_s, retract_to_model, UnitaryClass};
use crate::signature::global_signature;
use crate::spectral::{partition, OperatorKind};
use crate::tolerance::ToleranceConfig;

pub const SUITES: [&str; 7] = ["riesz", "signature-law", "cayley", "kramers", "taxonomy", "retraction", "factorization"];

/// One named check aggregated over a suite.
#[derive(Debug, Clone, Serialize)]
pub struct CheckStat {
    pub name: String,
    pub evaluated: usize,
    pub violations: usize,
    /// Largest residual seen, for residual-type checks.
    pub max_residual: Option<f64>,
    pub limit: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifySummary {
    pub suite: String,
    pub n: usize,
    pub seed: u64,
    pub passed: bool,
    pub checks: Vec<CheckStat>,
    pub counts: BTreeMap<String, usize>,
    /// First few failure descriptions.
    pub failures: Vec<String>,
}

const MAX_REPORTED: usize = 20;

struct Checks {
    stats: Vec<CheckStat>,
    counts: BTreeMap<String, usize>,
    failures: Vec<String>,
}

impl Checks {
    fn new() -> Self {
        Checks { stats: Vec::new(), counts: BTreeMap::new(), failures: Vec::new() }
    }

    fn stat(&mut self, name: &str) -> &mut CheckStat {
        if let Some(i) = self.stats.iter().position(|s| s.name == name) {
            return &mut self.stats[i];
        }
        self.stats.push(CheckStat { name: name.into(), evaluated: 0, violations: 0, max_residual: None, limit: None });
        self.stats.last_mut().unwrap()
    }

    fn fail(&mut self, msg: String) {
        if self.failures.len() < MAX_REPORTED {
            self.failures.push(msg);
        }
    }

    fn residual(&mut self, name: &str, value: f64, limit: f64, ctx: impl FnOnce() -> String) {
        let st = self.stat(name);
        st.evaluated += 1;
        st.limit = Some(limit);
        st.max_residual = Some(match st.max_residual {
            Some(m) if !(value > m) && !value.is_nan() => m,
            _ => value,
        });
        if !(value <= limit) {
            st.violations += 1;
            let msg = format!("{name}: {value:.3e} > {limit:.1e} ({})", ctx());
            self.fail(msg);
        }
    }

    fn holds(&mut self, name: &str, ok: bool, ctx: impl FnOnce() -> String) {
        let st = self.stat(name);
        st.evaluated += 1;
        if !ok {
            st.violations += 1;
            let msg = format!("{name}: {}", ctx());
            self.fail(msg);
        }
    }

    fn error(&mut self, ctx: String, e: &KreinError) {
        self.holds("no-errors", false, || format!("{ctx}: {e}"));
    }

    fn count(&mut self, key: &str) {
        *self.counts.entry(key.into()).or_default() += 1;
    }

    fn finish(mut self, suite: &str, n: usize, seed: u64) -> VerifySummary {
        self.stat("no-errors");
        let passed = self.stats.iter().all(|s| s.violations == 0);
        VerifySummary { suite: suite.into(), n, seed, passed, checks: self.stats, counts: self.counts, failures: self.failures }
    }
}

/// Seed of instance `i` within a suite run.
pub fn instance_seed(seed: u64, i: usize) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(i as u64)
}

pub fn run_suite(name: &str, n: usize, seed: u64, tol: &ToleranceConfig) -> Result<VerifySummary> {
    let checks = match name {
        "riesz" => riesz(n, seed, tol),
        "signature-law" => signature_law(n, seed, tol),
        "cayley" => cayley(n, seed, tol),
        "kramers" => kramers(n, seed, tol),
        "taxonomy" => taxonomy(n, seed, tol),
        "retraction" => retraction(n, seed, tol),
        "factorization" => factorization(n, seed),
        _ => return Err(KreinError::InvalidInput(format!("unknown suite `{name}` (expected one of {})", SUITES.join(", ")))),
    };
    Ok(checks.finish(name, n, seed))
}

fn riesz(n: usize, seed: u64, tol: &ToleranceConfig) -> Checks {
    let mut ch = Checks::new();
    let dim = 10;
    for i in 0..n {
        let s = instance_seed(seed, i);
        let t = complex_gaussian(&mut rng(s), dim, dim);
        let part = match partition(&t, tol) {
            Ok(p) => p,
            Err(e) => {
                ch.error(format!("seed {s}"), &e);
                continue;
            }
        };
        let tn = t.norm();
        for cl in &part.clusters {
            let p = &cl.projection;
            ch.residual("idempotency", (p * p - p).norm(), 1e-8, || format!("seed {s}, cluster {}", cl.center));
            ch.residual("commutator-rel", (p * &t - &t * p).norm() / tn, 1e-8, || format!("seed {s}, cluster {}", cl.center));
            let tr = p.trace();
            let dist = (tr - c(tr.re.round(), 0.0)).norm();
            ch.residual("trace-integrality", dist, 1e-6, || format!("seed {s}, cluster {}", cl.center));
            ch.holds("trace-equals-multiplicity", tr.re.round() as i64 == cl.multiplicity as i64, || format!("seed {s}: trace {tr} vs {}", cl.multiplicity));
        }
        ch.residual("resolution-of-identity", (part.projection_sum(dim) - CMat::identity(dim)).norm(), 1e-7, || format!("seed {s}"));
        ch.count("clusters");
    }
    ch
}

fn signature_law(n: usize, seed: u64, tol: &ToleranceConfig) -> Checks {
    let mut ch = Checks::new();
    for i in 0..n {
        let s = instance_seed(seed, i);
        let mut g = rng(s);
        let p = uniform_usize(&mut g, 0, 16);
        let q = uniform_usize(&mut g, if p == 0 { 1 } else { 0 }, 16 - p);
        let k = make_standard(p, q);
        let h = random_j_hermitian(&k, s);
        match global_signature(&h, &k, OperatorKind::Hermitian, tol) {
            Ok(rep) => {
                ch.holds("sig-equals-inertia-difference", rep.sig == p as i64 - q as i64, || format!("seed {s}, ({p},{q}): Sig = {}", rep.sig));
                ch.residual("membership", rep.membership_residual / h.norm().max(1.0), 1e-10, || format!("seed {s}"));
            }
            Err(e) => ch.error(format!("seed {s}, ({p},{q})"), &e),
        }
    }
    ch
}

fn cayley(n: usize, seed: u64, tol: &ToleranceConfig) -> Checks {
    let mut ch = Checks::new();
    for i in 0..n {
        let s = instance_seed(seed, i);
        let mut g = rng(s);
        let dim = uniform_usize(&mut g, 1, 10);
        let p = uniform_usize(&mut g, 0, dim);
        let k = make_standard(p, dim - p);
        let h = random_j_hermitian(&k, s);
        let side = if uniform(&mut g, 0.0, 1.0) < 0.5 { -1.0 } else { 1.0 };
        let z = c(uniform(&mut g, -1.0, 1.0), side * uniform(&mut g, 0.5, 2.0));
        let zeta = C64::from_polar(1.0, uniform(&mut g, 0.0, 2.0 * std::f64::consts::PI));
        let params = match CayleyParams::new(z, zeta) {
            Ok(p) => p,
            Err(e) => {
                ch.error(format!("seed {s}"), &e);
                continue;
            }
        };
        match transport_report(&h, &k, &params, tol) {
            Ok(rep) => {
                ch.holds("sig-preserved", rep.sig_preserved && rep.hermitian.sig == rep.unitary.sig, || format!("seed {s}: {} vs {}", rep.hermitian.sig, rep.unitary.sig));
                ch.holds("cluster-inertia-preserved", rep.inertia_preserved, || format!("seed {s}"));
                ch.holds("all-clusters-matched", rep.matches.len() == rep.hermitian.clusters.len(), || format!("seed {s}: {} of {}", rep.matches.len(), rep.hermitian.clusters.len()));
            }
            Err(e) => ch.error(format!("seed {s}, dim {dim}"), &e),
        }
    }
    ch
}

/// Real member [[0, B], [−B*, 0]] (symmetrized); its spectrum is purely
/// imaginary, so every eigenvalue sits on the Kramers line.
pub fn off_diagonal_member(rs: &RealStructure, seed: u64) -> CMat {
    let (p, q) = (rs.krein.n_plus, rs.krein.n_minus);
    let b = complex_gaussian(&mut rng(seed), p, q);
    let mut h = CMat::zeros(p + q, p + q);
    h.set_block(0, p, &b);
    h.set_block(p, 0, &b.adjoint().scale_re(-1.0));
    symmetrize_hermitian(&h, rs)
}

fn kramers(n: usize, seed: u64, tol: &ToleranceConfig) -> Checks {
    let mut ch = Checks::new();
    for kind in [RealKind::new(-1, 1), RealKind::new(-1, -1)] {
        for i in 0..n {
            let s = instance_seed(seed, i);
            let mut g = rng(s);
            let (p, q) = if kind.tau == 1 {
                (2 * uniform_usize(&mut g, 1, 2), 2 * uniform_usize(&mut g, 1, 2))
            } else {
                let m = uniform_usize(&mut g, 1, 3);
                (m, m)
            };
            let op = if i % 2 == 0 { OperatorKind::Unitary } else { OperatorKind::Hermitian };
            let rs = make_real_structure(kind, p, q).expect("compatible dimensions");
            // half generic members, half with the whole spectrum on the Kramers line
            let h = if (i / 2) % 2 == 0 { random_member(&rs, OperatorKind::Hermitian, s) } else { off_diagonal_member(&rs, s) };
            let a = match op {
                OperatorKind::Hermitian => h,
                OperatorKind::Unitary => matrix_exp(&h.scale(I)),
            };
            match kramers_check(&a, &rs, op, tol) {
                Ok(rep) => {
                    for cl in &rep.clusters {
                        ch.count(&format!("{kind} symmetric-point clusters"));
                        ch.holds("even-multiplicity", cl.1 % 2 == 0 && cl.2 % 2 == 0, || format!("{kind} seed {s}: λ = {} alg {} geo {}", cl.0, cl.1, cl.2));
                    }
                    ch.holds("report-consistent", rep.ok == rep.violations.is_empty(), || format!("{kind} seed {s}"));
                }
                Err(e) => ch.error(format!("{kind} seed {s}"), &e),
            }
        }
    }
    ch
}

/// Dimensions cycled through by the taxonomy suite.
fn taxonomy_dims(kind: Option<RealKind>, i: usize) -> (usize, usize) {
    match kind.map(|k| (k.eta, k.tau)) {
        None => [(1, 1), (2, 1), (2, 2)][i % 3],
        Some((1, 1)) => [(1, 1), (2, 1), (1, 2), (2, 2), (3, 2)][i % 5],
        Some((_, -1)) => [(1, 1), (2, 2), (3, 3)][i % 3],
        _ => [(2, 2), (4, 2), (2, 4)][i % 3],
    }
}

fn taxonomy(n: usize, seed: u64, tol: &ToleranceConfig) -> Checks {
    let mut ch = Checks::new();
    let kinds: Vec<Option<RealKind>> = std::iter::once(None).chain(RealKind::all().into_iter().map(Some)).collect();
    for kind in kinds {
        let label = kind.map_or("none".to_string(), |k| k.to_string());
        let allowed = allowed_kinds(kind);
        for i in 0..n {
            let s = instance_seed(seed, i);
            let (p, q) = taxonomy_dims(kind, i);
            let rs = kind.map(|k| make_real_structure(k, p, q).expect("compatible dimensions"));
            let op = if i % 2 == 0 { OperatorKind::Unitary } else { OperatorKind::Hermitian };
            let scale = if op == OperatorKind::Unitary { 1.5 } else { 1.0 };
            let path = OperatorPath::random_member_path(op, make_standard(p, q), rs, s, scale);
            match analyze(&path, &TrackOptions::fast(31), tol) {
                Ok((_, events)) => {
                    for e in &events {
                        ch.count(&format!("{label} {}", e.kind.as_str()));
                        ch.holds("allowed-event-kind", allowed.contains(&e.kind), || format!("{label} seed {s}: {} at t = {:.6}", e.kind.as_str(), e.t0));
                    }
                    let st = verify_krein_stability(&events);
                    ch.holds("krein-stability", st.ok, || format!("{label} seed {s}: {} definite departures", st.violations.len()));
                }
                Err(e) => ch.error(format!("{label} seed {s}"), &e),
            }
        }
    }
    let mut seen: Vec<EventKind> = Vec::new();
    for name in SCENARIOS {
        let sc = match scenario_library(name, &ScenarioParams::default()) {
            Ok(sc) => sc,
            Err(e) => {
                ch.error(format!("scenario {name}"), &e);
                continue;
            }
        };
        match analyze(&sc.path, &TrackOptions::default(), tol) {
            Ok((_, events)) => {
                ch.holds("library-events-match", events_match(&sc.expected, &events, 1e-3, 1e-3), || format!("{name}: {} events", events.len()));
                ch.holds("library-krein-stability", verify_krein_stability(&events).ok, || name.to_string());
                for e in &events {
                    if matches!(e.kind, EventKind::MTB | EventKind::MPD) {
                        ch.holds("multi-events-in-kind-1-1", sc.real_kind == Some(RealKind::new(1, 1)), || format!("{name}: {}", e.kind.as_str()));
                    }
                    seen.push(e.kind);
                }
            }
            Err(e) => ch.error(format!("scenario {name}"), &e),
        }
    }
    for k in [EventKind::KC, EventKind::QKC, EventKind::TB, EventKind::MTB, EventKind::PD, EventKind::MPD] {
        ch.holds("library-demonstrates-kind", seen.contains(&k), || format!("no {} event in the library", k.as_str()));
    }
    ch
}

fn retraction(n: usize, seed: u64, tol: &ToleranceConfig) -> Checks {
    let mut ch = Checks::new();
    let kinds: Vec<Option<RealKind>> = RealKind::all().into_iter().map(Some).chain(std::iter::once(None)).collect();
    for kind in kinds {
        let label = kind.map_or("none".to_string(), |k| k.to_string());
        for i in 0..n {
            let s = instance_seed(seed, i);
            let mut g = rng(s);
            let m = match kind {
                Some(k) if k.eta == -1 && k.tau == 1 => 2 * uniform_usize(&mut g, 1, 3),
                _ => uniform_usize(&mut g, 1, 6),
            };
            let (h, k, rs) = match kind {
                Some(kd) => {
                    let rs = make_real_structure(kd, m, m).expect("compatible dimensions");
                    (random_member(&rs, OperatorKind::Hermitian, s), rs.krein.clone(), Some(rs))
                }
                None => {
                    let k = make_standard(m, m);
                    (random_j_hermitian(&k, s), k, None)
                }
            };
            match retract_to_model(&h, &k, rs.as_ref(), tol) {
                Ok(tr) => {
                    let chk = tr.check();
                    let ctx = || format!("{label} n={m} seed {s}");
                    ch.residual("path-membership", chk.max_membership, 1e-7, ctx);
                    ch.residual("path-continuity", chk.max_gap, 1e-7, ctx);
                    ch.holds("sig-preserved", chk.sig_preserved, || format!("{} ({} -> {})", ctx(), tr.sig_initial, tr.sig_terminal));
                    ch.residual("terminal-spectrum", tr.terminal_data.spectrum_residual, 1e-6, ctx);
                    ch.residual("terminal-class", tr.terminal_data.class_residual, 1e-8, ctx);
                    ch.holds("trace-check", chk.ok, || format!("{}: {:?}", ctx(), chk.failures));
                    ch.count(&format!("{label} {}", tr.terminal_data.class.as_str()));
                }
                Err(e) => ch.error(format!("{label} n={m} seed {s}"), &e),
            }
        }
    }
    ch
}

fn factorization(n: usize, seed: u64) -> Checks {
    let mut ch = Checks::new();
    for class in [UnitaryClass::Symmetric, UnitaryClass::OddSymmetric] {
        let label = match class {
            UnitaryClass::Symmetric => "symmetric",
            UnitaryClass::OddSymmetric => "odd-symmetric",
        };
        for i in 0..n {
            let s = instance_seed(seed, i);
            let mut g = rng(s);
            let dim = match class {
                UnitaryClass::Symmetric => uniform_usize(&mut g, 1, 8),
                UnitaryClass::OddSymmetric => 2 * uniform_usize(&mut g, 1, 4),
            };
            // redraw until gapped at 1
            let v = loop {
                let w = unitary(&mut g, dim);
                let v = match class {
                    UnitaryClass::Symmetric => w.transpose() * &w,
                    UnitaryClass::OddSymmetric => {
                        let sm = odd_s(dim).expect("even dimension");
                        sm.adjoint() * w.transpose() * &sm * &w
                    }
                };
                if gap_to_one(&v).map_or(false, |d| d > 1e-3) {
                    break v;
                }
                ch.count(&format!("{label} redraws"));
            };
            match factorize_unitary(&v, class).and_then(|w| Ok((factorization_residual(&v, &w, class)?, w))) {
                Ok((res, w)) => {
                    ch.residual(&format!("{label}-residual"), res, 1e-9, || format!("seed {s}, dim {dim}"));
                    ch.residual(&format!("{label}-factor-unitarity"), (w.adjoint() * &w - CMat::identity(dim)).norm(), 1e-9, || format!("seed {s}, dim {dim}"));
                }
                Err(e) => ch.error(format!("{label} seed {s}, dim {dim}"), &e),
            }
        }
    }
    ch
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tol() -> ToleranceConfig {
        ToleranceConfig::default()
    }

    #[test]
    fn suites_pass_small() {
        for name in ["riesz", "signature-law", "cayley", "kramers", "retraction", "factorization"] {
            let sum = run_suite(name, 4, 11, &tol()).unwrap();
            assert!(sum.passed, "{name}: {:?}", sum.failures);
            assert!(sum.checks.iter().any(|c| c.evaluated > 0), "{name}");
        }
    }

    #[test]
    fn unknown_suite_is_input_error() {
        assert!(matches!(run_suite("nope", 1, 0, &tol()), Err(KreinError::InvalidInput(_))));
    }

    #[test]
    fn checks_record_violations() {
        let mut ch = Checks::new();
        ch.residual("r", 1.0, 0.5, String::new);
        ch.residual("r", f64::NAN, 0.5, String::new);
        ch.holds("h", true, String::new);
        let sum = ch.finish("x", 1, 0);
        assert!(!sum.passed);
        assert_eq!(sum.checks[0].violations, 2);
        assert_eq!(sum.checks[1].violations, 0);
    }

    #[test]
    fn summaries_are_deterministic() {
        let a = serde_json::to_string(&run_suite("riesz", 2, 5, &tol()).unwrap()).unwrap();
        let b = serde_json::to_string(&run_suite("riesz", 2, 5, &tol()).unwrap()).unwrap();
        assert_eq!(a, b);
    }
}

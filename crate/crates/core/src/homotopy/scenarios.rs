//! Curated example paths with their expected events.

use serde::{Deserialize, Serialize};

use super::events::{BifurcationEvent, Direction, EventKind};
use super::path::OperatorPath;
use crate::cayley::{cayley_op, cayley_scalar, CayleyParams, Extended};
use crate::error::{KreinError, Result};
use crate::krein::make_standard;
use crate::numerics::{c, CMat, C64, I};
use crate::realsym::{make_real_structure, RealKind};
use crate::spectral::OperatorKind;
use crate::tolerance::ToleranceConfig;

pub const SCENARIOS: [&str; 7] = ["finex", "kc2x2", "qkc", "tb", "mtb", "pd", "mpd"];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScenarioParams {
    /// Signs σ, σ′ of the O(1,1) family.
    pub sigma: f64,
    pub sigma_prime: f64,
}

impl Default for ScenarioParams {
    fn default() -> Self {
        ScenarioParams { sigma: 1.0, sigma_prime: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpectedEvent {
    pub kind: EventKind,
    pub direction: Option<Direction>,
    pub lambda0: C64,
    pub multiplicity: usize,
    /// Approximate collision time.
    pub t0: f64,
}

#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    pub path: OperatorPath,
    pub real_kind: Option<RealKind>,
    pub expected: Vec<ExpectedEvent>,
}

/// True iff `events` realize exactly `expected` (same count, kinds,
/// directions, multiplicities; λ0 within `lambda_tol`, t0 within `t_tol`).
pub fn events_match(expected: &[ExpectedEvent], events: &[BifurcationEvent], lambda_tol: f64, t_tol: f64) -> bool {
    expected.len() == events.len()
        && expected.iter().zip(events).all(|(x, e)| {
            x.kind == e.kind
                && x.direction == e.direction
                && x.multiplicity == e.multiplicity
                && (x.lambda0 - e.lambda0).norm() <= lambda_tol
                && (x.t0 - e.t0).abs() <= t_tol
        })
}

/// O(1,1) family T_t = [[σ cosh t, σ′ sinh t], [−σ′ sinh t, −σ cosh t]].
pub fn finex_matrix(sigma: f64, sigma_prime: f64, t: f64) -> CMat {
    CMat::from_real_rows(&[&[sigma * t.cosh(), sigma_prime * t.sinh()], &[-sigma_prime * t.sinh(), -sigma * t.cosh()]])
}

/// KC block H_s = [[s, 1], [−1, −s]]; eigenvalues ±√(s² − 1).
pub fn kc_block(s: f64) -> CMat {
    CMat::from_real_rows(&[&[s, 1.0], &[-1.0, -s]])
}

/// so(2,1) generator times i: eigenvalues 0 and ±√(1 − s²).
pub fn mtb_block(s: f64) -> CMat {
    CMat::from_real_rows(&[&[0.0, 1.0, 0.0], &[-1.0, 0.0, s], &[0.0, s, 0.0]]).scale(I)
}

/// Change of basis taking (B ⊕ −B̄ on C²⊕C², S = swap, J = J₂⊕J₂) to
/// the normal form S = 1, J = diag(1,1,−1,−1).
fn swap_to_standard() -> CMat {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut u = CMat::zeros(4, 4);
    // columns: (e1;e1), (ie1;−ie1), (e2;e2), (ie2;−ie2), over coordinates (x1,x2,y1,y2)
    let cols = [(0usize, c(h, 0.0), c(h, 0.0)), (0, c(0.0, h), c(0.0, -h)), (1, c(h, 0.0), c(h, 0.0)), (1, c(0.0, h), c(0.0, -h))];
    for (j, &(e, top, bottom)) in cols.iter().enumerate() {
        u[(e, j)] = top;
        u[(e + 2, j)] = bottom;
    }
    u
}

/// Hermitian QKC path in kind (1,1): B_s ⊕ −B_s with B_s = μ₀ + kc_block(s).
pub fn qkc_hermitian(mu0: f64, s: f64) -> CMat {
    let b = kc_block(s) + CMat::identity(2).scale_re(mu0);
    let big = CMat::block_diag(&b, &b.conj().scale_re(-1.0));
    let u = swap_to_standard();
    u.adjoint() * big * u
}

/// Parameter s(t) = 1.2 − 0.45 t crossing 1 at t = 4/9.
fn falling(t: f64) -> f64 {
    1.2 - 0.45 * t
}

/// Parameter s(t) = 0.8 + 0.45 t crossing 1 at t = 4/9.
fn rising(t: f64) -> f64 {
    0.8 + 0.45 * t
}

const T_CROSS: f64 = 4.0 / 9.0;

pub fn scenario_library(name: &str, params: &ScenarioParams) -> Result<Scenario> {
    let tol = ToleranceConfig::default();
    let one = C64::new(1.0, 0.0);
    let lift = |zeta: f64| CayleyParams::new(I, C64::new(zeta, 0.0)).expect("valid Cayley parameters");
    match name {
        "finex" => {
            if params.sigma.abs() != 1.0 || params.sigma_prime.abs() != 1.0 {
                return Err(KreinError::InvalidInput("finex signs must be ±1".into()));
            }
            let k = make_standard(1, 1);
            let rs = make_real_structure(RealKind::new(1, 1), 1, 1)?;
            let (s, sp) = (params.sigma, params.sigma_prime);
            let path = OperatorPath::new(OperatorKind::Unitary, k, Some(rs), 0.0, 2.0, move |t| Ok(finex_matrix(s, sp, t)));
            Ok(Scenario { name: name.into(), path, real_kind: Some(RealKind::new(1, 1)), expected: vec![] })
        }
        "kc2x2" => {
            let k = make_standard(1, 1);
            let path = OperatorPath::new(OperatorKind::Hermitian, k, None, 0.0, 2.0, |t| Ok(kc_block(t)));
            let expected = vec![ExpectedEvent {
                kind: EventKind::KC,
                direction: Some(Direction::Arrival),
                lambda0: C64::new(0.0, 0.0),
                multiplicity: 2,
                t0: 1.0,
            }];
            Ok(Scenario { name: name.into(), path, real_kind: None, expected })
        }
        "qkc" => {
            let mu0 = 1.5;
            let kind = RealKind::new(1, 1);
            let k = make_standard(2, 2);
            let rs = make_real_structure(kind, 2, 2)?;
            let p = lift(1.0);
            let path = OperatorPath::new(OperatorKind::Unitary, k, Some(rs), 0.0, 1.0, move |t| cayley_op(&qkc_hermitian(mu0, falling(t)), &k, &p, &tol));
            let images = [mu0, -mu0].map(|m| cayley_scalar(&p, Extended::Finite(C64::new(m, 0.0))).finite().unwrap());
            let lambda0 = if images[0].im >= 0.0 { images[0] } else { images[1] };
            let expected = vec![ExpectedEvent { kind: EventKind::QKC, direction: Some(Direction::Departure), lambda0, multiplicity: 2, t0: T_CROSS }];
            Ok(Scenario { name: name.into(), path, real_kind: Some(kind), expected })
        }
        "tb" | "pd" => {
            let kind = RealKind::new(1, -1);
            let k = make_standard(1, 1);
            let rs = make_real_structure(kind, 1, 1)?;
            let (zeta, ev, lambda0) = if name == "tb" { (-1.0, EventKind::TB, one) } else { (1.0, EventKind::PD, -one) };
            let p = lift(zeta);
            let path = OperatorPath::new(OperatorKind::Unitary, k, Some(rs), 0.0, 1.0, move |t| cayley_op(&kc_block(falling(t)), &k, &p, &tol));
            let expected = vec![ExpectedEvent { kind: ev, direction: Some(Direction::Departure), lambda0, multiplicity: 2, t0: T_CROSS }];
            Ok(Scenario { name: name.into(), path, real_kind: Some(kind), expected })
        }
        "mtb" | "mpd" => {
            let kind = RealKind::new(1, 1);
            let k = make_standard(2, 1);
            let rs = make_real_structure(kind, 2, 1)?;
            let (zeta, ev, lambda0) = if name == "mtb" { (-1.0, EventKind::MTB, one) } else { (1.0, EventKind::MPD, -one) };
            let p = lift(zeta);
            let path = OperatorPath::new(OperatorKind::Unitary, k, Some(rs), 0.0, 1.0, move |t| cayley_op(&mtb_block(rising(t)), &k, &p, &tol));
            let expected = vec![ExpectedEvent { kind: ev, direction: Some(Direction::Departure), lambda0, multiplicity: 3, t0: T_CROSS }];
            Ok(Scenario { name: name.into(), path, real_kind: Some(kind), expected })
        }
        other => Err(KreinError::UnknownScenario(other.to_string())),
    }
}

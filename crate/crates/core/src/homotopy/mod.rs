//! Operator paths, eigenvalue tracking, collision events and the curated
//! scenario library.

mod assign;
mod events;
mod path;
mod scenarios;
mod track;

pub use assign::min_cost_assignment;
pub use events::{allowed_kinds, detect_events, special_points, verify_krein_stability, BifurcationEvent, Direction, EventKind, StabilityReport};
pub use path::{OperatorPath, Sampler};
pub use scenarios::{
    events_match, finex_matrix, kc_block, mtb_block, qkc_hermitian, scenario_library, ExpectedEvent, Scenario, ScenarioParams, SCENARIOS,
};
pub use track::{classify_boundary, track, SampleRegion, TrackOptions, TrackResult, TrackSample, Trajectory, MOVE_FRACTION};

use crate::error::{KreinError, Result};
use crate::tolerance::ToleranceConfig;

/// Track and detect in one go.
///
/// An event that cannot be resolved at the minimum step (two collisions
/// closer in time than the step) triggers a retrack with a finer floor.
pub fn analyze(path: &OperatorPath, opts: &TrackOptions, tol: &ToleranceConfig) -> Result<(TrackResult, Vec<BifurcationEvent>)> {
    let mut t = tol.clone();
    for attempt in 0.. {
        let tr = track(path, opts, &t)?;
        match detect_events(&tr, path, &t) {
            Ok(ev) => return Ok((tr, ev)),
            Err(KreinError::UnresolvedEvent { .. }) if attempt < REFINE_RETRIES => t.min_step *= 1e-2,
            Err(e) => return Err(e),
        }
    }
    unreachable!()
}

/// Finer-floor retries in [`analyze`].
pub const REFINE_RETRIES: usize = 2;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::krein::make_standard;
    use crate::numerics::{CMat, C64};
    use crate::signature::InertiaPair;
    use crate::spectral::OperatorKind;

    fn tol() -> ToleranceConfig {
        ToleranceConfig::default()
    }

    #[test]
    fn kc2x2_single_arrival() {
        let sc = scenario_library("kc2x2", &ScenarioParams::default()).unwrap();
        let (tr, ev) = analyze(&sc.path, &TrackOptions::default(), &tol()).unwrap();
        assert!(events_match(&sc.expected, &ev, 1e-3, 1e-3), "{ev:?}");
        assert!(verify_krein_stability(&ev).ok);
        // closed-form oracle λ = ±√(t² − 1)
        for (k, &t) in tr.times.iter().enumerate() {
            let mut got: Vec<C64> = tr.values[k].clone();
            got.sort_by(|a, b| (a.re + a.im).partial_cmp(&(b.re + b.im)).unwrap());
            let r = C64::new(t * t - 1.0, 0.0).sqrt();
            let mut want = vec![r, -r];
            want.sort_by(|a, b| (a.re + a.im).partial_cmp(&(b.re + b.im)).unwrap());
            let err = (got[0] - want[0]).norm().max((got[1] - want[1]).norm());
            assert!(err < 1e-6, "t = {t}: {got:?} vs {want:?}");
        }
    }

    #[test]
    fn diagonal_circle_path_has_constant_inertia() {
        let k = make_standard(1, 1);
        let path = OperatorPath::new(OperatorKind::Unitary, k, None, 0.5, 3.5, |t| {
            Ok(CMat::diag(&[C64::from_polar(1.0, t), C64::from_polar(1.0, -t)]))
        });
        let (tr, ev) = analyze(&path, &TrackOptions::default(), &tol()).unwrap();
        let trajs = tr.trajectories();
        let want = [InertiaPair::new(1, 0), InertiaPair::new(0, 1)];
        for (traj, nu) in trajs.iter().zip(want) {
            for (k, s) in traj.samples.iter().enumerate() {
                // coincident samples report the aggregated inertia
                if (tr.values[k][0] - tr.values[k][1]).norm() > 1e-5 {
                    assert_eq!(s.inertia, Some(nu), "t = {}", s.t);
                }
            }
        }
        assert_eq!(ev.len(), 1);
        assert_eq!(ev[0].kind, EventKind::PassThrough);
        assert!((ev[0].lambda0 + C64::new(1.0, 0.0)).norm() < 1e-4);
    }

    #[test]
    fn diagonal_crossing_is_pass_through() {
        let k = make_standard(2, 0);
        let path = OperatorPath::new(OperatorKind::Hermitian, k, None, 0.0, 1.0, |t| Ok(CMat::real_diag(&[t, 1.0 - t])));
        let (_, ev) = analyze(&path, &TrackOptions::default(), &tol()).unwrap();
        assert_eq!(ev.len(), 1);
        assert_eq!(ev[0].kind, EventKind::PassThrough);
        assert_eq!(ev[0].inertia_before, Some(InertiaPair::new(2, 0)));
    }

    #[test]
    fn library_paths_realize_their_fixture() {
        for name in SCENARIOS {
            let sc = scenario_library(name, &ScenarioParams::default()).unwrap();
            let (_, ev) = analyze(&sc.path, &TrackOptions::fast(21), &tol()).unwrap();
            assert!(events_match(&sc.expected, &ev, 1e-3, 1e-3), "{name}: {ev:#?}");
            assert!(verify_krein_stability(&ev).ok, "{name}");
        }
    }

    #[test]
    fn reversal_flips_direction() {
        let sc = scenario_library("mtb", &ScenarioParams::default()).unwrap();
        let (_, fwd) = analyze(&sc.path, &TrackOptions::fast(21), &tol()).unwrap();
        let (_, bwd) = analyze(&sc.path.reversed(), &TrackOptions::fast(21), &tol()).unwrap();
        assert_eq!(fwd.len(), bwd.len());
        for (a, b) in fwd.iter().zip(bwd.iter().rev()) {
            assert_eq!(a.kind, b.kind);
            assert_eq!(a.direction.map(|d| d.flipped()), b.direction);
            assert!((a.t0 - (1.0 - b.t0)).abs() < 1e-5);
        }
    }

    #[test]
    fn unknown_scenario() {
        assert!(matches!(scenario_library("nope", &ScenarioParams::default()), Err(crate::KreinError::UnknownScenario(_))));
    }

    #[test]
    fn synthetic_violation_flagged() {
        let sc = scenario_library("kc2x2", &ScenarioParams::default()).unwrap();
        let (_, mut ev) = analyze(&sc.path, &TrackOptions::fast(21), &tol()).unwrap();
        ev[0].inertia_after = Some(InertiaPair::new(2, 0));
        let rep = verify_krein_stability(&ev);
        assert!(!rep.ok);
        assert_eq!(rep.violations.len(), 1);
    }

    #[test]
    fn assignment_tracks_well_separated_crossing() {
        let p = min_cost_assignment(&[vec![0.0, 1.0], vec![1.0, 0.0]]);
        assert_eq!(p, vec![0, 1]);
    }

    #[test]
    fn close_collisions_resolved_by_finer_floor() {
        use crate::realsym::{make_real_structure, RealKind};
        // a quadruplet lands on the circle next to 1, then a pair transits 1
        // about 2.5e-7 later; the default floor cannot separate the two
        let rs = make_real_structure(RealKind::new(1, 1), 3, 2).unwrap();
        let path = OperatorPath::random_member_path(OperatorKind::Unitary, make_standard(3, 2), Some(rs), 20024, 1.5);
        assert!(matches!(detect_events(&track(&path, &TrackOptions::fast(31), &tol()).unwrap(), &path, &tol()), Err(crate::error::KreinError::UnresolvedEvent { .. })));
        let (_, ev) = analyze(&path, &TrackOptions::fast(31), &tol()).unwrap();
        let near: Vec<EventKind> = ev.iter().filter(|e| (e.t0 - 0.8201272).abs() < 1e-5).map(|e| e.kind).collect();
        assert_eq!(near, vec![EventKind::QKC, EventKind::MTB]);
    }

    #[test]
    fn fine_floor_terminates_away_from_zero() {
        // ulp(t) rounding must not keep a step above the floor forever
        let sc = scenario_library("kc2x2", &ScenarioParams::default()).unwrap();
        let t = ToleranceConfig { min_step: 1e-10, ..tol() };
        let (_, ev) = analyze(&sc.path, &TrackOptions::fast(31), &t).unwrap();
        assert_eq!(ev.len(), 1);
    }
}

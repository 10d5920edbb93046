//! Krein-collision detection, classification and stability verification.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::path::OperatorPath;
use super::track::{classification_radius, coincidence_radius, TrackResult};
use crate::error::{KreinError, Result};
use crate::numerics::{eigenvalues, CMat, C64};
use crate::realsym::real_reflection;
use crate::signature::{form_inertia, InertiaPair};
use crate::spectral::{centroid, cluster_eigenvalues, range_frame, riesz_projection_relative, riesz_projection_with, spectral_radius, OperatorKind};
use crate::tolerance::ToleranceConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum EventKind {
    KC,
    QKC,
    TB,
    MTB,
    PD,
    MPD,
    #[serde(rename = "PASS_THROUGH")]
    PassThrough,
}

impl EventKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            EventKind::KC => "KC",
            EventKind::QKC => "QKC",
            EventKind::TB => "TB",
            EventKind::MTB => "MTB",
            EventKind::PD => "PD",
            EventKind::MPD => "MPD",
            EventKind::PassThrough => "PASS_THROUGH",
        }
    }

    pub fn is_departure_class(&self) -> bool {
        !matches!(self, EventKind::PassThrough)
    }
}

/// Departure: eigenvalues leave the circle/axis as t increases; Arrival:
/// they land on it (the time-reversed departure).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Departure,
    Arrival,
}

impl Direction {
    pub fn flipped(&self) -> Direction {
        match self {
            Direction::Departure => Direction::Arrival,
            Direction::Arrival => Direction::Departure,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BifurcationEvent {
    pub kind: EventKind,
    pub direction: Option<Direction>,
    /// Bracket containing the collision.
    pub t_lo: f64,
    pub t_hi: f64,
    pub t0: f64,
    pub lambda0: C64,
    pub multiplicity: usize,
    pub inertia_before: Option<InertiaPair>,
    pub inertia_after: Option<InertiaPair>,
    pub tracks: Vec<usize>,
}

impl BifurcationEvent {
    /// Aggregated inertia of the colliding cluster on the boundary side.
    pub fn collision_inertia(&self) -> Option<InertiaPair> {
        match self.direction {
            Some(Direction::Arrival) => self.inertia_after,
            _ => self.inertia_before,
        }
    }
}

/// Special points of the Real reflection: ±1 (unitary) or 0 (hermitian).
pub fn special_points(kind: OperatorKind) -> Vec<C64> {
    match kind {
        OperatorKind::Unitary => vec![C64::new(1.0, 0.0), C64::new(-1.0, 0.0)],
        OperatorKind::Hermitian => vec![C64::new(0.0, 0.0)],
    }
}

/// Canonical representative of {λ, Real reflection of λ}: Im ≥ 0 for
/// unitaries, Re ≥ 0 for hermitians.
fn canonical(z: C64, kind: OperatorKind) -> bool {
    match kind {
        OperatorKind::Unitary => z.im >= 0.0,
        OperatorKind::Hermitian => z.re >= 0.0,
    }
}

fn group_inertia(a: &CMat, members: &[C64], tol: &ToleranceConfig, path: &OperatorPath) -> Option<InertiaPair> {
    if members.is_empty() {
        return Some(InertiaPair::default());
    }
    let eigs = eigenvalues(a).ok()?;
    // remove one matching eigenvalue per member
    let mut others = eigs.clone();
    for m in members {
        let (j, _) = others.iter().enumerate().min_by(|x, y| (x.1 - m).norm().partial_cmp(&(y.1 - m).norm()).unwrap())?;
        others.remove(j);
    }
    let delta = tol.cluster_rel * (1.0 + spectral_radius(&eigs));
    let p = match riesz_projection_with(a, members, &others, delta, 64, tol) {
        Ok((p, _)) => p,
        Err(KreinError::QuadratureDivergence { .. }) => riesz_projection_relative(a, members, &others, delta, tol).ok()?,
        Err(_) => return None,
    };
    let frame = range_frame(&p, members.len());
    form_inertia(&frame, &path.krein, tol.zero).ok()
}

struct Group {
    tracks: Vec<usize>,
    moving: usize,
    center: C64,
    spread: f64,
}

fn single_linkage(points: &[(usize, C64)], radius: f64) -> Vec<Vec<usize>> {
    let zs: Vec<C64> = points.iter().map(|p| p.1).collect();
    cluster_eigenvalues(&zs, radius).into_iter().map(|g| g.into_iter().map(|i| points[i].0).collect()).collect()
}

/// Detects and classifies collision events along a tracked path.
pub fn detect_events(tr: &TrackResult, path: &OperatorPath, tol: &ToleranceConfig) -> Result<Vec<BifurcationEvent>> {
    let n = tr.n_tracks();
    let mut events = Vec::new();
    for k in 0..tr.times.len().saturating_sub(1) {
        let dep: Vec<usize> = (0..n).filter(|&i| tr.on_boundary[k][i] && !tr.on_boundary[k + 1][i]).collect();
        let arr: Vec<usize> = (0..n).filter(|&i| !tr.on_boundary[k][i] && tr.on_boundary[k + 1][i]).collect();
        if !dep.is_empty() {
            events.extend(assemble(tr, path, k, k, &dep, Direction::Departure, tol)?);
        }
        if !arr.is_empty() {
            events.extend(assemble(tr, path, k, k + 1, &arr, Direction::Arrival, tol)?);
        }
    }
    events.sort_by(|a, b| a.t0.partial_cmp(&b.t0).unwrap());
    let mut events = merge_touches(tr, events);
    let extra = pass_throughs(tr, path, &events, tol);
    events.extend(extra);
    events.sort_by(|a, b| a.t0.partial_cmp(&b.t0).unwrap());
    Ok(events)
}

fn assemble(
    tr: &TrackResult,
    path: &OperatorPath,
    k: usize,
    k_on: usize,
    moving: &[usize],
    dir: Direction,
    tol: &ToleranceConfig,
) -> Result<Vec<BifurcationEvent>> {
    let kind = tr.kind;
    let (t_lo, t_hi) = (tr.times[k], tr.times[k + 1]);
    let unresolved = || KreinError::UnresolvedEvent { t_lo, t_hi };
    if t_hi - t_lo > 2.0 * tol.min_step * (1.0 + 1e-6) {
        return Err(unresolved());
    }
    let vals = &tr.values[k_on];
    let rho = spectral_radius(vals);
    let pts: Vec<(usize, C64)> = moving.iter().map(|&i| (i, vals[i])).collect();
    // smallest linkage radius leaving no moving track alone, so that
    // nearby collisions (e.g. the two halves of a QKC) stay apart
    let link = pts
        .iter()
        .map(|(i, z)| pts.iter().filter(|(j, _)| j != i).map(|(_, w)| (z - w).norm()).fold(f64::INFINITY, f64::min))
        .fold(0.0f64, f64::max);
    if !(link <= 0.1 * (1.0 + rho)) {
        return Err(unresolved());
    }
    let mut groups = Vec::new();
    for g in single_linkage(&pts, link * (1.0 + 1e-9) + coincidence_radius(rho)) {
        let zs: Vec<C64> = g.iter().map(|&i| vals[i]).collect();
        let c = centroid(&zs);
        let diam = zs.iter().flat_map(|a| zs.iter().map(move |b| (a - b).norm())).fold(0.0f64, f64::max);
        let reach = (2.0 * diam).max(coincidence_radius(rho));
        let mut members = g.clone();
        for i in 0..vals.len() {
            if !g.contains(&i) && tr.on_boundary[k_on][i] && (vals[i] - c).norm() <= reach {
                members.push(i);
            }
        }
        members.sort_unstable();
        let all: Vec<C64> = members.iter().map(|&i| vals[i]).collect();
        let center = centroid(&all);
        let spread = all.iter().map(|z| (z - center).norm()).fold(0.0f64, f64::max);
        if g.len() < 2 {
            return Err(unresolved());
        }
        groups.push(Group { tracks: members, moving: g.len(), center, spread });
    }
    // pair groups exchanged by the Real reflection into one event
    let mut used = vec![false; groups.len()];
    let mut out = Vec::new();
    for a in 0..groups.len() {
        if used[a] {
            continue;
        }
        used[a] = true;
        let mut rep = a;
        let mut tracks: BTreeSet<usize> = groups[a].tracks.iter().copied().collect();
        if path.real.is_some() {
            let target = real_reflection(groups[a].center, kind);
            let self_sym = (target - groups[a].center).norm() <= (0.5 * groups[a].spread).max(tol.special_point);
            if !self_sym {
                if let Some(b) = (0..groups.len()).find(|&b| !used[b] && (groups[b].center - target).norm() <= 0.1 * (1.0 + rho)) {
                    used[b] = true;
                    tracks.extend(groups[b].tracks.iter().copied());
                    if !canonical(groups[a].center, kind) {
                        rep = b;
                    }
                }
            }
        }
        let g = &groups[rep];
        let special = special_points(kind)
            .into_iter()
            .find(|s| (g.center - s).norm() <= tol.special_point.max(0.5 * g.spread));
        let mult = g.tracks.len();
        let ev_kind = match (&path.real, special) {
            (None, _) => EventKind::KC,
            (Some(_), None) => EventKind::QKC,
            (Some(_), Some(s)) => {
                let at_one = match kind {
                    OperatorKind::Unitary => s.re > 0.0,
                    OperatorKind::Hermitian => true,
                };
                match (mult, at_one) {
                    (2, true) => EventKind::TB,
                    (2, false) => EventKind::PD,
                    (3, true) => EventKind::MTB,
                    (3, false) => EventKind::MPD,
                    _ => return Err(unresolved()),
                }
            }
        };
        let lambda0 = special.unwrap_or(g.center);
        let _ = g.moving;
        // inertia on both sides of the bracket, for the representative group
        let a_lo = path.evaluate(t_lo)?;
        let a_hi = path.evaluate(t_hi)?;
        let on_members = |kk: usize| -> Vec<C64> { g.tracks.iter().filter(|&&i| tr.on_boundary[kk][i]).map(|&i| tr.values[kk][i]).collect() };
        let before = group_inertia(&a_lo, &on_members(k), tol, path);
        let after = group_inertia(&a_hi, &on_members(k + 1), tol, path);
        out.push(BifurcationEvent {
            kind: ev_kind,
            direction: Some(dir),
            t_lo,
            t_hi,
            t0: 0.5 * (t_lo + t_hi),
            lambda0,
            multiplicity: mult,
            inertia_before: before,
            inertia_after: after,
            tracks: tracks.into_iter().collect(),
        });
    }
    Ok(out)
}

/// An arrival and the opposite departure of the same coincident tracks,
/// with the tracks never separating in between, is a single touch of the
/// boundary (e.g. a reciprocal pair r, 1/r crossing 1 in O(1,1)). No
/// eigenvalue lives on the boundary on one side of it, so it is recorded
/// as a pass-through.
fn merge_touches(tr: &TrackResult, events: Vec<BifurcationEvent>) -> Vec<BifurcationEvent> {
    let together = |e: &BifurcationEvent, f: &BifurcationEvent| {
        let ks = (0..tr.times.len()).filter(|&k| tr.times[k] >= e.t_hi && tr.times[k] <= f.t_lo);
        ks.into_iter().all(|k| {
            let r = classification_radius(spectral_radius(&tr.values[k]));
            e.tracks.iter().all(|&i| e.tracks.iter().all(|&j| (tr.values[k][i] - tr.values[k][j]).norm() <= r))
        })
    };
    let mut out: Vec<BifurcationEvent> = Vec::new();
    let mut skip = vec![false; events.len()];
    for a in 0..events.len() {
        if skip[a] {
            continue;
        }
        let e = &events[a];
        let partner = (a + 1..events.len()).find(|&b| {
            let f = &events[b];
            !skip[b] && f.tracks == e.tracks && e.direction.is_some() && f.direction == e.direction.map(|d| d.flipped())
        });
        match partner {
            Some(b) if together(e, &events[b]) => {
                let f = &events[b];
                skip[b] = true;
                out.push(BifurcationEvent {
                    kind: EventKind::PassThrough,
                    direction: None,
                    t_lo: e.t_lo,
                    t_hi: f.t_hi,
                    t0: 0.5 * (e.t0 + f.t0),
                    lambda0: e.lambda0,
                    multiplicity: e.multiplicity,
                    inertia_before: e.inertia_before,
                    inertia_after: f.inertia_after,
                    tracks: e.tracks.clone(),
                });
            }
            _ => out.push(e.clone()),
        }
    }
    out
}

/// On-boundary near-collisions without departure.
fn pass_throughs(tr: &TrackResult, path: &OperatorPath, events: &[BifurcationEvent], tol: &ToleranceConfig) -> Vec<BifurcationEvent> {
    struct Run {
        first: usize,
        last: usize,
        tracks: BTreeSet<usize>,
        best_k: usize,
        best_members: Vec<usize>,
        best_diam: f64,
        /// Seen as separate atoms at least once; permanent degeneracies
        /// (e.g. Kramers pairs) never are.
        resolved: bool,
    }
    let n = tr.n_tracks();
    let mut open: Vec<Run> = Vec::new();
    let mut closed: Vec<Run> = Vec::new();
    for k in 0..tr.times.len() {
        let vals = &tr.values[k];
        let rho = spectral_radius(vals);
        let on: Vec<usize> = (0..n).filter(|&i| tr.on_boundary[k][i]).collect();
        // atoms: numerically coincident eigenvalues count once
        let pts: Vec<(usize, C64)> = on.iter().map(|&i| (i, vals[i])).collect();
        let atoms = single_linkage(&pts, coincidence_radius(rho));
        let atom_pts: Vec<(usize, C64)> = atoms.iter().enumerate().map(|(a, m)| (a, vals[m[0]])).collect();
        let mut clusters = Vec::new();
        for g in single_linkage(&atom_pts, 1e-4 * (1.0 + rho)) {
            let members: Vec<usize> = g.iter().flat_map(|&a| atoms[a].iter().copied()).collect();
            if members.len() < 2 {
                continue;
            }
            let zs: Vec<C64> = members.iter().map(|&i| vals[i]).collect();
            let diam = zs.iter().flat_map(|a| zs.iter().map(move |b| (a - b).norm())).fold(0.0f64, f64::max);
            clusters.push((members, diam, g.len() > 1));
        }
        let mut next_open: Vec<Run> = Vec::new();
        for (members, diam, resolved) in clusters {
            let pos = open.iter().position(|r| members.iter().any(|i| r.tracks.contains(i)));
            let mut run = match pos {
                Some(p) => open.remove(p),
                None => Run {
                    first: k,
                    last: k,
                    tracks: BTreeSet::new(),
                    best_k: k,
                    best_members: members.clone(),
                    best_diam: f64::INFINITY,
                    resolved: false,
                },
            };
            run.last = k;
            run.resolved |= resolved;
            run.tracks.extend(members.iter().copied());
            if diam < run.best_diam {
                run.best_diam = diam;
                run.best_k = k;
                run.best_members = members;
            }
            next_open.push(run);
        }
        closed.extend(open.drain(..));
        open = next_open;
    }
    closed.extend(open);
    let mut out = Vec::new();
    for run in closed {
        let lo = tr.times[run.first.saturating_sub(1)];
        let hi = tr.times[(run.last + 1).min(tr.times.len() - 1)];
        let overlaps = events.iter().any(|e| e.t_hi >= lo && e.t_lo <= hi && e.tracks.iter().any(|i| run.tracks.contains(i)));
        if overlaps || !run.resolved {
            continue;
        }
        let k = run.best_k;
        let zs: Vec<C64> = run.best_members.iter().map(|&i| tr.values[k][i]).collect();
        let nu = path.evaluate(tr.times[k]).ok().and_then(|a| group_inertia(&a, &zs, tol, path));
        out.push(BifurcationEvent {
            kind: EventKind::PassThrough,
            direction: None,
            t_lo: tr.times[k],
            t_hi: tr.times[k],
            t0: tr.times[k],
            lambda0: centroid(&zs),
            multiplicity: zs.len(),
            inertia_before: nu,
            inertia_after: nu,
            tracks: run.best_members.clone(),
        });
    }
    out
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StabilityReport {
    pub ok: bool,
    /// Departure/arrival events whose collision inertia is definite or
    /// could not be computed.
    pub violations: Vec<BifurcationEvent>,
}

/// Every eigenvalue departure must happen at an indefinite collision.
pub fn verify_krein_stability(events: &[BifurcationEvent]) -> StabilityReport {
    let violations: Vec<BifurcationEvent> = events
        .iter()
        .filter(|e| e.kind.is_departure_class())
        .filter(|e| match e.collision_inertia() {
            Some(nu) => nu.is_definite(),
            None => true,
        })
        .cloned()
        .collect();
    StabilityReport { ok: violations.is_empty(), violations }
}

/// Event kinds Prop-3.6-style genericity allows for a Real kind, or `None`
/// for paths without Real structure.
pub fn allowed_kinds(real: Option<crate::realsym::RealKind>) -> Vec<EventKind> {
    use EventKind::*;
    match real.map(|k| (k.eta, k.tau)) {
        None => vec![KC, PassThrough],
        Some((1, 1)) => vec![QKC, MTB, MPD, PassThrough],
        Some((1, -1)) => vec![QKC, TB, PD, PassThrough],
        Some(_) => vec![QKC, PassThrough],
    }
}

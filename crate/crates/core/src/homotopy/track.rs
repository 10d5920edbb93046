//! Adaptive eigenvalue tracking along operator paths.

use serde::{Deserialize, Serialize};

use super::assign::min_cost_assignment;
use super::path::OperatorPath;
use crate::error::{KreinError, Result};
use crate::numerics::{eigenvalues, CMat, C64};
use crate::signature::{form_inertia, InertiaPair};
use crate::spectral::{centroid, cluster_eigenvalues, default_delta, partition_from_eigenvalues, spectral_radius, OperatorKind};
use crate::tolerance::ToleranceConfig;

/// Moves larger than this fraction of the distance to the nearest other
/// eigenvalue trigger bisection.
pub const MOVE_FRACTION: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrackOptions {
    pub initial_grid: usize,
    /// Record Krein inertia of on-boundary eigenvalues at every sample.
    pub with_inertia: bool,
    pub max_samples: usize,
}

impl Default for TrackOptions {
    fn default() -> Self {
        TrackOptions { initial_grid: 41, with_inertia: true, max_samples: 200_000 }
    }
}

impl TrackOptions {
    pub fn fast(initial_grid: usize) -> Self {
        TrackOptions { initial_grid, with_inertia: false, ..Default::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SampleRegion {
    Circle,
    Inside,
    Outside,
    Axis,
    Upper,
    Lower,
}

impl SampleRegion {
    pub fn as_str(&self) -> &'static str {
        match self {
            SampleRegion::Circle => "circle",
            SampleRegion::Inside => "inside",
            SampleRegion::Outside => "outside",
            SampleRegion::Axis => "axis",
            SampleRegion::Upper => "upper",
            SampleRegion::Lower => "lower",
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrackSample {
    pub t: f64,
    pub eigenvalue: C64,
    pub region: SampleRegion,
    /// Krein inertia of the on-boundary cluster containing the eigenvalue;
    /// `None` off the boundary (paired) or when not recorded.
    pub inertia: Option<InertiaPair>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Trajectory {
    pub track_id: usize,
    pub samples: Vec<TrackSample>,
    /// Largest single-step move observed along the track.
    pub continuity_bound: f64,
}

/// All tracks sampled on a common adaptive time grid.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrackResult {
    pub kind: OperatorKind,
    pub times: Vec<f64>,
    /// `values[k][i]`: eigenvalue of track `i` at `times[k]`.
    pub values: Vec<Vec<C64>>,
    pub on_boundary: Vec<Vec<bool>>,
    pub inertia: Vec<Vec<Option<InertiaPair>>>,
    /// `bottomed[k]`: the step `times[k] → times[k+1]` was accepted at the
    /// minimum step size while still violating the continuity criterion.
    pub bottomed: Vec<bool>,
}

impl TrackResult {
    pub fn n_tracks(&self) -> usize {
        self.values.first().map_or(0, |v| v.len())
    }

    pub fn region_of(&self, k: usize, i: usize) -> SampleRegion {
        let z = self.values[k][i];
        match (self.kind, self.on_boundary[k][i]) {
            (OperatorKind::Unitary, true) => SampleRegion::Circle,
            (OperatorKind::Unitary, false) if z.norm() < 1.0 => SampleRegion::Inside,
            (OperatorKind::Unitary, false) => SampleRegion::Outside,
            (OperatorKind::Hermitian, true) => SampleRegion::Axis,
            (OperatorKind::Hermitian, false) if z.im > 0.0 => SampleRegion::Upper,
            (OperatorKind::Hermitian, false) => SampleRegion::Lower,
        }
    }

    pub fn trajectories(&self) -> Vec<Trajectory> {
        (0..self.n_tracks())
            .map(|i| {
                let samples: Vec<TrackSample> = (0..self.times.len())
                    .map(|k| TrackSample {
                        t: self.times[k],
                        eigenvalue: self.values[k][i],
                        region: self.region_of(k, i),
                        inertia: self.inertia[k][i],
                    })
                    .collect();
                let continuity_bound = self.values.windows(2).map(|w| (w[1][i] - w[0][i]).norm()).fold(0.0f64, f64::max);
                Trajectory { track_id: i, samples, continuity_bound }
            })
            .collect()
    }

    /// CSV with columns t, track_id, re, im, nu_plus, nu_minus, region.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,track_id,re,im,nu_plus,nu_minus,region\n");
        for k in 0..self.times.len() {
            for i in 0..self.n_tracks() {
                let z = self.values[k][i];
                let (np, nm) = match self.inertia[k][i] {
                    Some(nu) => (nu.nu_plus.to_string(), nu.nu_minus.to_string()),
                    None => (String::new(), String::new()),
                };
                out.push_str(&format!("{},{},{},{},{},{},{}\n", self.times[k], i, z.re, z.im, np, nm, self.region_of(k, i).as_str()));
            }
        }
        out
    }
}

/// Radius below which eigenvalues count as numerically coincident.
pub(crate) fn coincidence_radius(rho: f64) -> f64 {
    1e-7 * (1.0 + rho)
}

/// Radius used to pool eigenvalues before classifying them by centroid, so
/// that rounding-split defective groups are classified together.
pub(crate) fn classification_radius(rho: f64) -> f64 {
    1e-5 * (1.0 + rho)
}

/// On-boundary flag per eigenvalue, decided on pooled centroids.
pub fn classify_boundary(eigs: &[C64], kind: OperatorKind, tol: &ToleranceConfig) -> Vec<bool> {
    let rho = spectral_radius(eigs);
    let region = kind.boundary_region();
    let mut on = vec![false; eigs.len()];
    for g in cluster_eigenvalues(eigs, classification_radius(rho)) {
        let c = centroid(&g.iter().map(|&i| eigs[i]).collect::<Vec<_>>());
        let flag = region.boundary_distance(c).abs() <= 10.0 * tol.eps_region;
        for i in g {
            on[i] = flag;
        }
    }
    on
}

fn sample_inertia(a: &CMat, eigs: &[C64], on: &[bool], path: &OperatorPath, tol: &ToleranceConfig) -> Vec<Option<InertiaPair>> {
    let mut out = vec![None; eigs.len()];
    if !on.iter().any(|&x| x) {
        return out;
    }
    let part = match partition_from_eigenvalues(a, eigs, default_delta(eigs, tol), tol) {
        Ok(p) => p,
        Err(_) => return out,
    };
    for (i, z) in eigs.iter().enumerate() {
        if !on[i] {
            continue;
        }
        let cl = part.clusters.iter().min_by(|a, b| {
            let da = a.eigenvalues.iter().map(|w| (w - z).norm()).fold(f64::INFINITY, f64::min);
            let db = b.eigenvalues.iter().map(|w| (w - z).norm()).fold(f64::INFINITY, f64::min);
            da.partial_cmp(&db).unwrap()
        });
        if let Some(cl) = cl {
            out[i] = form_inertia(&cl.frame, &path.krein, tol.zero).ok();
        }
    }
    out
}

struct StepCheck {
    violated: bool,
    /// A violating eigenvalue had no neighbour it could be colliding with.
    isolated: bool,
}

fn check_step(prev: &[C64], new: &[C64], on_prev: &[bool], on_new: &[bool]) -> StepCheck {
    let rho = spectral_radius(prev).max(spectral_radius(new));
    let tiny = coincidence_radius(rho);
    let iso = 0.05 * (1.0 + rho);
    let mut violated = on_prev != on_new;
    let mut isolated = false;
    for i in 0..prev.len() {
        let d = (0..prev.len())
            .filter(|&j| j != i)
            .map(|j| (prev[i] - prev[j]).norm())
            .filter(|&d| d > tiny)
            .fold(f64::INFINITY, f64::min);
        let mv = (new[i] - prev[i]).norm();
        if mv > MOVE_FRACTION * d {
            violated = true;
            if d > iso {
                isolated = true;
            }
        }
    }
    StepCheck { violated, isolated }
}

fn matched(prev: &[C64], eigs: &[C64]) -> Vec<C64> {
    let cost: Vec<Vec<f64>> = prev.iter().map(|p| eigs.iter().map(|e| (p - e).norm()).collect()).collect();
    let perm = min_cost_assignment(&cost);
    perm.iter().map(|&j| eigs[j]).collect()
}

/// Linear extrapolation of the tracks to `tn`, so that transversal
/// crossings are followed through instead of bouncing.
fn predict(res: &TrackResult, tn: f64) -> Vec<C64> {
    let k = res.times.len() - 1;
    if k == 0 {
        return res.values[0].clone();
    }
    let f = (tn - res.times[k]) / (res.times[k] - res.times[k - 1]);
    res.values[k].iter().zip(&res.values[k - 1]).map(|(a, b)| a + (a - b) * f).collect()
}

/// Tracks all eigenvalues of the path with adaptive bisection.
pub fn track(path: &OperatorPath, opts: &TrackOptions, tol: &ToleranceConfig) -> Result<TrackResult> {
    if opts.initial_grid < 2 {
        return Err(KreinError::InvalidInput("initial grid needs at least 2 points".into()));
    }
    let (t0, t1) = (path.t_start, path.t_end);
    let grid = opts.initial_grid;
    let h_max = (t1 - t0) / (grid - 1) as f64;
    let grid_t = |g: usize| if g + 1 == grid { t1 } else { t0 + g as f64 * h_max };

    let a0 = path.sample(t0, tol)?;
    let e0 = eigenvalues(&a0)?;
    let on0 = classify_boundary(&e0, path.kind, tol);
    let mut res = TrackResult {
        kind: path.kind,
        times: vec![t0],
        inertia: vec![if opts.with_inertia { sample_inertia(&a0, &e0, &on0, path, tol) } else { vec![None; e0.len()] }],
        values: vec![e0],
        on_boundary: vec![on0],
        bottomed: Vec::new(),
    };
    let mut t = t0;
    let mut h = h_max;
    let eps_t = 1e-14 * (1.0 + t0.abs().max(t1.abs()));
    for g in 1..grid {
        let target = grid_t(g);
        while target - t > eps_t {
            let mut step = h.min(target - t);
            loop {
                let tn = if step >= target - t - eps_t { target } else { t + step };
                let a = path.sample(tn, tol)?;
                let eigs = matched(&predict(&res, tn), &eigenvalues(&a)?);
                let on = classify_boundary(&eigs, path.kind, tol);
                let chk = check_step(res.values.last().unwrap(), &eigs, res.on_boundary.last().unwrap(), &on);
                // tn - t carries rounding of order ulp(t); judge the requested step
                let at_min = step <= tol.min_step * (1.0 + 1e-9) || tn - t <= tol.min_step * (1.0 + 1e-9);
                if !chk.violated || at_min {
                    if chk.violated && chk.isolated {
                        return Err(KreinError::StepUnderflow { t_lo: t, t_hi: tn });
                    }
                    let inertia = if opts.with_inertia { sample_inertia(&a, &eigs, &on, path, tol) } else { vec![None; eigs.len()] };
                    res.times.push(tn);
                    res.values.push(eigs);
                    res.on_boundary.push(on);
                    res.inertia.push(inertia);
                    res.bottomed.push(chk.violated);
                    h = if chk.violated { tn - t } else { (2.0 * (tn - t)).min(h_max) };
                    t = tn;
                    break;
                }
                step = (0.5 * step).max(tol.min_step);
            }
            if res.times.len() > opts.max_samples {
                return Err(KreinError::NoConvergence { iterations: res.times.len() });
            }
        }
    }
    Ok(res)
}

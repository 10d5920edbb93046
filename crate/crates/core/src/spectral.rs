//! Eigenvalue clustering, Riesz projections by contour quadrature and
//! region-restricted spectral subspaces.

use serde::{Deserialize, Serialize};

use crate::error::{KreinError, Result};
use crate::krein::KreinStructure;
use crate::numerics::{eigenvalues, null_space, r, singular_values, svd, CMat, Lu, C64};
use crate::tolerance::ToleranceConfig;

/// A group of nearby eigenvalues with its Riesz projection.
#[derive(Debug, Clone)]
pub struct SpectralCluster {
    pub center: C64,
    pub eigenvalues: Vec<C64>,
    pub multiplicity: usize,
    pub projection: CMat,
    /// Orthonormal basis of range(projection).
    pub frame: CMat,
    pub quad_points: usize,
}

#[derive(Debug, Clone)]
pub struct ClusterPartition {
    pub clusters: Vec<SpectralCluster>,
    /// Minimal distance between eigenvalues of different clusters.
    pub gap: f64,
    pub delta: f64,
}

impl ClusterPartition {
    pub fn projection_sum(&self, n: usize) -> CMat {
        self.clusters.iter().fold(CMat::zeros(n, n), |acc, c| &acc + &c.projection)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Region {
    RealAxis,
    UnitCircle,
    UpperHalf,
    LowerHalf,
    InsideDisc,
    OutsideDisc,
}

impl Region {
    /// Signed distance to the region boundary; positive means the open side
    /// belonging to the region (for the two boundary regions it is |·|).
    pub fn boundary_distance(&self, z: C64) -> f64 {
        match self {
            Region::RealAxis => z.im.abs(),
            Region::UnitCircle => (z.norm() - 1.0).abs(),
            Region::UpperHalf => z.im,
            Region::LowerHalf => -z.im,
            Region::InsideDisc => 1.0 - z.norm(),
            Region::OutsideDisc => z.norm() - 1.0,
        }
    }

    fn is_boundary_region(&self) -> bool {
        matches!(self, Region::RealAxis | Region::UnitCircle)
    }

    /// Membership with band `eps`; errors when `z` sits in the ambiguous
    /// annulus `eps < dist ≤ 10·eps` of the boundary.
    pub fn contains(&self, z: C64, eps: f64) -> Result<bool> {
        let d = self.boundary_distance(z);
        let unsigned = d.abs();
        if unsigned > eps && unsigned <= 10.0 * eps {
            return Err(KreinError::AmbiguousClassification { lambda: z, distance: unsigned });
        }
        Ok(if self.is_boundary_region() { unsigned <= eps } else { d > 10.0 * eps })
    }
}

pub fn spectral_radius(eigs: &[C64]) -> f64 {
    eigs.iter().fold(0.0f64, |a, z| a.max(z.norm()))
}

/// Default clustering radius `rel·(1 + ρ)`.
pub fn default_delta(eigs: &[C64], tol: &ToleranceConfig) -> f64 {
    tol.cluster_rel * (1.0 + spectral_radius(eigs))
}

/// Transitive closure of `|λᵢ − λⱼ| ≤ delta`; groups of indices sorted by
/// (real part, imaginary part) of their centroids.
pub fn cluster_eigenvalues(eigs: &[C64], delta: f64) -> Vec<Vec<usize>> {
    let n = eigs.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut Vec<usize>, i: usize) -> usize {
        let mut i = i;
        while p[i] != i {
            p[i] = p[p[i]];
            i = p[i];
        }
        i
    }
    for i in 0..n {
        for j in i + 1..n {
            if (eigs[i] - eigs[j]).norm() <= delta {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut root_of: Vec<Option<usize>> = vec![None; n];
    for i in 0..n {
        let root = find(&mut parent, i);
        match root_of[root] {
            Some(g) => groups[g].push(i),
            None => {
                root_of[root] = Some(groups.len());
                groups.push(vec![i]);
            }
        }
    }
    groups.sort_by(|a, b| {
        let ca = centroid(&a.iter().map(|&i| eigs[i]).collect::<Vec<_>>());
        let cb = centroid(&b.iter().map(|&i| eigs[i]).collect::<Vec<_>>());
        ca.re.partial_cmp(&cb.re).unwrap().then(ca.im.partial_cmp(&cb.im).unwrap())
    });
    groups
}

pub fn centroid(zs: &[C64]) -> C64 {
    zs.iter().sum::<C64>() / zs.len().max(1) as f64
}

/// Circle (centre, radius) separating `cluster` from `others`.
fn separating_circle(cluster: &[C64], others: &[C64], delta: f64, gap_tol: f64) -> Result<(C64, f64)> {
    let center = centroid(cluster);
    let r_in = cluster.iter().fold(0.0f64, |a, z| a.max((z - center).norm()));
    let r_out = others.iter().fold(f64::INFINITY, |a, z| a.min((z - center).norm()));
    let mut radius = if r_out.is_finite() { 0.5 * r_out } else { (1.0f64).max(2.0 * r_in) };
    radius = radius.max(0.5 * delta);
    if !(radius > r_in && radius < r_out) {
        radius = 0.5 * (r_in + r_out);
    }
    let clearance = cluster
        .iter()
        .chain(others.iter())
        .fold(f64::INFINITY, |a, z| a.min(((z - center).norm() - radius).abs()));
    if !(r_in < r_out) || clearance < gap_tol {
        return Err(KreinError::NoSeparatingContour { center });
    }
    Ok((center, radius))
}

fn trapezoid(t: &CMat, center: C64, radius: f64, points: usize, pivot_rel: f64) -> Result<CMat> {
    let n = t.rows();
    let id = CMat::identity(n);
    let mut acc = CMat::zeros(n, n);
    for k in 0..points {
        let theta = 2.0 * std::f64::consts::PI * (k as f64 + 0.5) / points as f64;
        let w = C64::from_polar(radius, theta);
        let z = center + w;
        // (z − T)⁻¹
        let res = Lu::new(&(-t).shift(-z), pivot_rel)?.solve(&id);
        acc = &acc + &res.scale(w);
    }
    Ok(acc.scale_re(1.0 / points as f64))
}

/// Riesz projection for the eigenvalues `cluster`, all other eigenvalues of
/// `T` being `others`. Returns the projection and the quadrature size used.
pub fn riesz_projection_with(
    t: &CMat,
    cluster: &[C64],
    others: &[C64],
    delta: f64,
    quad_points: usize,
    tol: &ToleranceConfig,
) -> Result<(CMat, usize)> {
    let (center, radius) = separating_circle(cluster, others, delta, tol.contour_gap)?;
    let mut points = quad_points.max(8);
    loop {
        let p = trapezoid(t, center, radius, points, tol.pivot_rel).map_err(|e| match e {
            KreinError::SingularMatrix { .. } => KreinError::NoSeparatingContour { center },
            other => other,
        })?;
        let residual = (&p * &p - &p).norm();
        if residual <= tol.riesz {
            return Ok((p, points));
        }
        if points >= 1024 {
            return Err(KreinError::QuadratureDivergence { residual, points });
        }
        points *= 2;
    }
}

/// Like [`riesz_projection_with`], but for ill-conditioned splittings where
/// ‖P‖ is large and ‖P² − P‖ has a rounding floor near ε‖P‖²: doubles the
/// quadrature until successive projections agree to `tol.riesz`·‖P‖.
pub fn riesz_projection_relative(t: &CMat, cluster: &[C64], others: &[C64], delta: f64, tol: &ToleranceConfig) -> Result<CMat> {
    let (center, radius) = separating_circle(cluster, others, delta, tol.contour_gap)?;
    let mut points = 64;
    let mut prev = trapezoid(t, center, radius, points, tol.pivot_rel)?;
    loop {
        points *= 2;
        let p = trapezoid(t, center, radius, points, tol.pivot_rel)?;
        let change = (&p - &prev).norm();
        if change <= tol.riesz * p.norm().max(1.0) {
            return Ok(p);
        }
        if points >= 1024 {
            return Err(KreinError::QuadratureDivergence { residual: change, points });
        }
        prev = p;
    }
}

/// Riesz projection onto the eigenvalues of `T` lying within `delta` of the
/// given cluster values.
pub fn riesz_projection(t: &CMat, cluster: &[C64], quad_points: usize, tol: &ToleranceConfig) -> Result<CMat> {
    let eigs = eigenvalues(t)?;
    let delta = default_delta(&eigs, tol);
    let mut inside = Vec::new();
    let mut outside = Vec::new();
    for &z in &eigs {
        if cluster.iter().any(|c| (c - z).norm() <= f64::max(delta, 1e-9)) {
            inside.push(z);
        } else {
            outside.push(z);
        }
    }
    if inside.is_empty() {
        return Ok(CMat::zeros(t.rows(), t.cols()));
    }
    Ok(riesz_projection_with(t, &inside, &outside, delta, quad_points, tol)?.0)
}

/// Top-`m` left singular vectors of `P` (its range when rank P = m).
pub fn range_frame(p: &CMat, m: usize) -> CMat {
    if m == 0 {
        return CMat::zeros(p.rows(), 0);
    }
    let s = svd(p);
    let idx: Vec<usize> = (0..m).collect();
    let mut f = s.u.select_cols(&idx);
    crate::numerics::reorthonormalize(&mut f);
    f
}

fn build_cluster(t: &CMat, members: &[C64], others: &[C64], delta: f64, tol: &ToleranceConfig) -> Result<SpectralCluster> {
    let (projection, quad_points) = riesz_projection_with(t, members, others, delta, 64, tol)?;
    let multiplicity = members.len();
    let frame = range_frame(&projection, multiplicity);
    Ok(SpectralCluster { center: centroid(members), eigenvalues: members.to_vec(), multiplicity, projection, frame, quad_points })
}

/// Full cluster partition of σ(T) with Riesz projections.
///
/// Clusters whose projection trace disagrees with the eigenvalue count (a
/// symptom of a defective group split by rounding) are merged with their
/// nearest neighbour and recomputed.
pub fn partition(t: &CMat, tol: &ToleranceConfig) -> Result<ClusterPartition> {
    let eigs = eigenvalues(t)?;
    partition_from_eigenvalues(t, &eigs, default_delta(&eigs, tol), tol)
}

pub fn partition_from_eigenvalues(t: &CMat, eigs: &[C64], delta: f64, tol: &ToleranceConfig) -> Result<ClusterPartition> {
    let mut delta = delta;
    for _attempt in 0..12 {
        let groups = cluster_eigenvalues(eigs, delta);
        let mut clusters = Vec::with_capacity(groups.len());
        let mut bad = false;
        for g in &groups {
            let members: Vec<C64> = g.iter().map(|&i| eigs[i]).collect();
            let others: Vec<C64> = (0..eigs.len()).filter(|i| !g.contains(i)).map(|i| eigs[i]).collect();
            match build_cluster(t, &members, &others, delta, tol) {
                Ok(c) => {
                    let tr = c.projection.trace();
                    if (tr - r(c.multiplicity as f64)).norm() > 1e-6 {
                        bad = true;
                        break;
                    }
                    clusters.push(c);
                }
                Err(KreinError::NoSeparatingContour { .. }) | Err(KreinError::QuadratureDivergence { .. }) => {
                    bad = true;
                    break;
                }
                Err(e) => return Err(e),
            }
        }
        if !bad {
            let mut gap = f64::INFINITY;
            for (a, ga) in groups.iter().enumerate() {
                for gb in groups.iter().skip(a + 1) {
                    for &i in ga {
                        for &j in gb {
                            gap = gap.min((eigs[i] - eigs[j]).norm());
                        }
                    }
                }
            }
            return Ok(ClusterPartition { clusters, gap, delta });
        }
        // widen the clustering radius to the next merge distance
        let groups_now = cluster_eigenvalues(eigs, delta);
        let mut next = f64::INFINITY;
        for (a, ga) in groups_now.iter().enumerate() {
            for gb in groups_now.iter().skip(a + 1) {
                for &i in ga {
                    for &j in gb {
                        next = next.min((eigs[i] - eigs[j]).norm());
                    }
                }
            }
        }
        if !next.is_finite() {
            break;
        }
        delta = (next * 1.000001).max(delta * 2.0);
    }
    Err(KreinError::QuadratureDivergence { residual: f64::NAN, points: 1024 })
}

/// Clusters of a partition lying in `region` with band `eps_region`.
pub fn spectral_subspaces(t: &CMat, _k: &KreinStructure, region: Region, eps_region: f64, tol: &ToleranceConfig) -> Result<ClusterPartition> {
    let part = partition(t, tol)?;
    restrict(part, region, eps_region)
}

pub fn restrict(part: ClusterPartition, region: Region, eps_region: f64) -> Result<ClusterPartition> {
    let mut kept = Vec::new();
    for c in part.clusters {
        if region.contains(c.center, eps_region)? {
            kept.push(c);
        }
    }
    Ok(ClusterPartition { clusters: kept, gap: part.gap, delta: part.delta })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OperatorKind {
    Unitary,
    Hermitian,
}

impl OperatorKind {
    /// Reflection λ ↦ 1/λ̄ (unitary) or λ ↦ λ̄ (hermitian).
    pub fn krein_reflection(&self, z: C64) -> C64 {
        match self {
            OperatorKind::Unitary => C64::new(1.0, 0.0) / z.conj(),
            OperatorKind::Hermitian => z.conj(),
        }
    }

    pub fn boundary_region(&self) -> Region {
        match self {
            OperatorKind::Unitary => Region::UnitCircle,
            OperatorKind::Hermitian => Region::RealAxis,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProjectionSymmetryReport {
    /// (cluster centre, partner centre, residual) per cluster.
    pub pairs: Vec<(C64, C64, f64)>,
    pub max_residual: f64,
}

/// Residuals ‖P_Δ* − J·P_{Δ'}·J‖ with Δ' the Krein reflection of Δ.
pub fn check_projection_symmetry(
    part: &ClusterPartition,
    k: &KreinStructure,
    kind: OperatorKind,
    match_tol: f64,
) -> Result<ProjectionSymmetryReport> {
    let mut pairs = Vec::new();
    let mut max_residual: f64 = 0.0;
    for c in &part.clusters {
        let target = kind.krein_reflection(c.center);
        let partner = part
            .clusters
            .iter()
            .min_by(|a, b| (a.center - target).norm().partial_cmp(&(b.center - target).norm()).unwrap())
            .filter(|p| (p.center - target).norm() <= match_tol * (1.0 + target.norm()))
            .ok_or(KreinError::UnmatchedReflection { center: c.center })?;
        let res = (c.projection.adjoint() - k.left(&k.right(&partner.projection))).norm();
        max_residual = max_residual.max(res);
        pairs.push((c.center, partner.center, res));
    }
    Ok(ProjectionSymmetryReport { pairs, max_residual })
}

/// `F = J·Ψ·Ψ*` with Ψ a frame of ker(H − λ); `H − λ + F` must be invertible.
pub fn fredholm_corrector(h: &CMat, k: &KreinStructure, lambda: f64, tol: &ToleranceConfig) -> Result<CMat> {
    let a = h.shift(r(lambda));
    let psi = null_space(&a, tol.rank, 1.0f64.max(h.norm()));
    let f = k.left(&(&psi * psi.adjoint()));
    let smin = singular_values(&(&a + &f)).last().copied().unwrap_or(0.0);
    if smin <= 1e-8 {
        return Err(KreinError::CorrectionFailed { smin });
    }
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::krein::make_standard;
    use crate::numerics::{c, I};

    fn tol() -> ToleranceConfig {
        ToleranceConfig::default()
    }

    #[test]
    fn clustering_examples() {
        let g = cluster_eigenvalues(&[r(1.0), r(-1.0)], 0.1);
        assert_eq!(g.len(), 2);
        let g = cluster_eigenvalues(&[r(1.0), r(1.0 + 1e-12)], 1e-8);
        assert_eq!(g, vec![vec![0, 1]]);
        // chains merge transitively
        let g = cluster_eigenvalues(&[r(0.0), r(0.5), r(1.0)], 0.6);
        assert_eq!(g.len(), 1);
    }

    #[test]
    fn riesz_diag_and_jordan() {
        let p = riesz_projection(&CMat::real_diag(&[2.0, 0.5]), &[r(2.0)], 64, &tol()).unwrap();
        assert!(p.dist(&CMat::real_diag(&[1.0, 0.0])) < 1e-12);
        let j = CMat::from_real_rows(&[&[1.0, 1.0], &[0.0, 1.0]]);
        let p = riesz_projection(&j, &[r(1.0)], 64, &tol()).unwrap();
        assert!(p.dist(&CMat::identity(2)) < 1e-12);
    }

    #[test]
    fn riesz_upper_triangular_residue() {
        // residue oracle: P = (T − ½)/(2 − ½)
        let t = CMat::from_real_rows(&[&[2.0, 1.0], &[0.0, 0.5]]);
        let p = riesz_projection(&t, &[r(2.0)], 64, &tol()).unwrap();
        let expect = CMat::from_real_rows(&[&[1.0, 2.0 / 3.0], &[0.0, 0.0]]);
        assert!(p.dist(&expect) < 1e-12, "{p:?}");
    }

    #[test]
    fn regions_of_index_example() {
        let k = make_standard(1, 1);
        let h = CMat::from_rows(&[vec![r(0.0), I], vec![I, r(0.0)]]);
        let t = tol();
        assert!(spectral_subspaces(&h, &k, Region::RealAxis, 1e-7, &t).unwrap().clusters.is_empty());
        let up = spectral_subspaces(&h, &k, Region::UpperHalf, 1e-7, &t).unwrap();
        assert_eq!(up.clusters.len(), 1);
        assert!((up.clusters[0].center - I).norm() < 1e-12);
        let lo = spectral_subspaces(&h, &k, Region::LowerHalf, 1e-7, &t).unwrap();
        assert!((lo.clusters[0].center + I).norm() < 1e-12);
    }

    #[test]
    fn real_pair_of_two_by_two_family() {
        // characteristic polynomial λ² = t² − 1 at t = 2
        let k = make_standard(1, 1);
        let h = CMat::from_real_rows(&[&[2.0, 1.0], &[-1.0, -2.0]]);
        let part = spectral_subspaces(&h, &k, Region::RealAxis, 1e-7, &tol()).unwrap();
        assert_eq!(part.clusters.len(), 2);
        assert!((part.clusters[0].center - r(-(3.0f64).sqrt())).norm() < 1e-12);
        assert!((part.clusters[1].center - r((3.0f64).sqrt())).norm() < 1e-12);
    }

    #[test]
    fn ambiguous_band_is_an_error() {
        let z = c(1.0, 5e-7);
        assert!(matches!(Region::RealAxis.contains(z, 1e-7), Err(KreinError::AmbiguousClassification { .. })));
        assert!(Region::RealAxis.contains(c(1.0, 5e-8), 1e-7).unwrap());
        assert!(!Region::RealAxis.contains(c(1.0, 5e-6), 1e-7).unwrap());
    }

    #[test]
    fn projection_symmetry_negative_control() {
        // diag(2, 1/2) is not J-unitary on (1,1); the pairing still finds
        // 1/conj(2) = 1/2 and reports the true residual ‖diag(1,−1)‖ = √2.
        let k = make_standard(1, 1);
        let part = partition(&CMat::real_diag(&[2.0, 0.5]), &tol()).unwrap();
        let rep = check_projection_symmetry(&part, &k, OperatorKind::Unitary, 1e-6).unwrap();
        let two = rep.pairs.iter().find(|p| (p.0 - r(2.0)).norm() < 1e-9).unwrap();
        assert!((two.1 - r(0.5)).norm() < 1e-9);
        assert!((two.2 - 2f64.sqrt()).abs() < 1e-10);
    }

    #[test]
    fn projection_symmetry_identity() {
        let k = make_standard(1, 1);
        let part = partition(&CMat::identity(2), &tol()).unwrap();
        let rep = check_projection_symmetry(&part, &k, OperatorKind::Unitary, 1e-6).unwrap();
        assert!(rep.max_residual < 1e-12);
    }

    #[test]
    fn corrector_examples() {
        let k = make_standard(1, 1);
        let f = fredholm_corrector(&CMat::zeros(2, 2), &k, 0.0, &tol()).unwrap();
        assert!(f.dist(&k.j()) < 1e-12);
        let f = fredholm_corrector(&k.j(), &k, 1.0, &tol()).unwrap();
        assert!(f.dist(&CMat::real_diag(&[1.0, 0.0])) < 1e-12);
        let f = fredholm_corrector(&k.j(), &k, 0.3, &tol()).unwrap();
        assert!(f.norm() < 1e-15);
    }
}

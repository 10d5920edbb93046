//! The individual homotopies of the retraction.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::frames::prepare_frame;
use super::unitary::{class_projection, class_residual, factorize_unitary_any, generator_projection, odd_s, MatrixClass, UnitaryClass};
use crate::error::{KreinError, Result};
use crate::homotopy::OperatorPath;
use crate::krein::{make_standard, KreinStructure};
use crate::numerics::{c, complement_frame, hermitian_function, inverse, matrix_exp, polar_unitary, smallest_singular_value, unitary_log_hermitian, CMat, I};
use crate::realsym::{RealKind, RealStructure};
use crate::signature::{form_inertia, membership_residual, InertiaPair};
use crate::spectral::{partition, range_frame, OperatorKind, Region};
use crate::tolerance::ToleranceConfig;

const CHECK_TOL: f64 = 1e-8;

fn check_hermitian_member(h: &CMat, k: &KreinStructure, tol: &ToleranceConfig) -> Result<()> {
    if !h.is_square() || h.rows() != k.dim() {
        return Err(KreinError::DimensionMismatch { expected: format!("{0}x{0}", k.dim()), got: format!("{}x{}", h.rows(), h.cols()) });
    }
    let res = membership_residual(h, k, OperatorKind::Hermitian)?;
    if !(res <= tol.membership * h.norm().max(1.0)) {
        return Err(KreinError::InvalidInput(format!("operator is not J-hermitian (residual {res:.3e})")));
    }
    Ok(())
}

/// `J·P*·J`.
fn j_adjoint(p: &CMat, k: &KreinStructure) -> CMat {
    k.left(&k.right(&p.adjoint()))
}

/// Riesz projections onto the spectrum in the open upper and lower half
/// planes. The lower one is taken as J·P₊*·J, and with a Real structure
/// P₊ is averaged with its reflection, so that i(P₊ − P₋) is exactly a
/// (Real) J-hermitian.
pub fn half_plane_projections(h: &CMat, k: &KreinStructure, rs: Option<&RealStructure>, tol: &ToleranceConfig) -> Result<(CMat, CMat)> {
    let n = h.rows();
    let part = partition(h, tol)?;
    let mut p = CMat::zeros(n, n);
    for cl in &part.clusters {
        if Region::UpperHalf.contains(cl.center, tol.eps_region)? {
            p = p + &cl.projection;
        }
    }
    if let Some(rs) = rs {
        p = (&p + &rs.reflect(&p)).scale_re(0.5);
    }
    let q = j_adjoint(&p, k);
    Ok((p, q))
}

pub struct Flattening {
    pub path: OperatorPath,
    /// H′ = i(P₊ − P₋).
    pub flat: CMat,
    pub p_plus: CMat,
    pub p_minus: CMat,
}

/// H_t = (1 − t)H + it(P₊ − P₋).
pub fn spectral_flatten(h: &CMat, k: &KreinStructure, rs: Option<&RealStructure>, tol: &ToleranceConfig) -> Result<Flattening> {
    check_hermitian_member(h, k, tol)?;
    let (p_plus, p_minus) = half_plane_projections(h, k, rs, tol)?;
    let flat = (&p_plus - &p_minus).scale(I);
    let (h0, f) = (h.clone(), flat.clone());
    let path = OperatorPath::new(OperatorKind::Hermitian, *k, rs.cloned(), 0.0, 1.0, move |t| Ok(h0.scale_re(1.0 - t) + f.scale_re(t)));
    Ok(Flattening { path, flat, p_plus, p_minus })
}

#[derive(Debug, Clone)]
pub struct BlockDecomposition {
    pub psi: CMat,
    pub phi: CMat,
    pub n_psi: CMat,
    pub n_phi: CMat,
    pub m: CMat,
    pub m_inv: CMat,
    pub h_psi: CMat,
    pub j_psi: CMat,
    pub h_phi: CMat,
    pub j_phi: CMat,
}

struct FormData {
    n: CMat,
    n_inv: CMat,
    sign: CMat,
    j_inv: CMat,
}

fn form_data(frame: &CMat, k: &KreinStructure) -> Result<FormData> {
    let j = frame.adjoint_mul(&k.left(frame)).hermitian_part();
    if j.rows() > 0 {
        let (d, _) = crate::numerics::herm_eig(&j)?;
        let min_abs = d.iter().map(|x| x.abs()).fold(f64::INFINITY, f64::min);
        if !(min_abs > CHECK_TOL) {
            return Err(KreinError::DegenerateSubspace { min_abs });
        }
    }
    Ok(FormData {
        n: hermitian_function(&j, |x| c(x.abs().powf(-0.5), 0.0))?,
        n_inv: hermitian_function(&j, |x| c(x.abs().sqrt(), 0.0))?,
        sign: hermitian_function(&j, |x| c(x.signum(), 0.0))?,
        j_inv: hermitian_function(&j, |x| c(1.0 / x, 0.0))?,
    })
}

/// Splitting along an invariant J-nondegenerate subspace E and its
/// J-orthogonal complement J·E^⊥.
pub fn block_decompose(h: &CMat, k: &KreinStructure, e_frame: &CMat, tol: &ToleranceConfig) -> Result<BlockDecomposition> {
    let n = k.dim();
    let psi = crate::numerics::orthonormal_frame(e_frame, tol.rank);
    let scale = h.norm().max(1.0);
    let hp = h * &psi;
    let inv_res = (&hp - &(&psi * psi.adjoint_mul(&hp))).norm();
    if !(inv_res <= CHECK_TOL * scale) {
        return Err(KreinError::NotInvariant { residual: inv_res });
    }
    let fp = form_data(&psi, k)?;
    let phi = if psi.cols() == n { CMat::zeros(n, 0) } else { k.left(&complement_frame(&psi)) };
    let ff = form_data(&phi, k)?;
    let left_psi = &ff_row(&fp) * &k.right(&psi.adjoint());
    let left_phi = &ff_row(&ff) * &k.right(&phi.adjoint());
    let m = (&psi * &fp.n).hstack(&(&phi * &ff.n));
    let m_inv = left_psi.vstack(&left_phi);
    let h_psi = &left_psi * h * &psi * &fp.n;
    let h_phi = &left_phi * h * &phi * &ff.n;
    let block = CMat::block_diag(&h_psi, &h_phi);
    let conj = &m_inv * h * &m;
    let off = (&conj - &block).norm();
    if !(off <= CHECK_TOL * scale) {
        return Err(KreinError::NotInvariant { residual: off });
    }
    let form = m.adjoint_mul(&k.left(&m));
    let form_res = (&form - &CMat::block_diag(&fp.sign, &ff.sign)).norm();
    if !(form_res <= CHECK_TOL) {
        return Err(KreinError::DegenerateSubspace { min_abs: form_res });
    }
    Ok(BlockDecomposition { psi, phi, n_psi: fp.n, n_phi: ff.n, m, m_inv, h_psi, j_psi: fp.sign, h_phi, j_phi: ff.sign })
}

/// n⁻¹·j⁻¹ (rows of M⁻¹ before the factor Ψ*J).
fn ff_row(f: &FormData) -> CMat {
    &f.n_inv * &f.j_inv
}

pub struct Lifting {
    pub path: OperatorPath,
    pub lifted: CMat,
    /// Inertia of ker of the input (the lifted degeneracy).
    pub input_kernel: InertiaPair,
    pub kernel_inertia: InertiaPair,
    pub kernel_dim: usize,
    /// Orthonormal frame of the remaining kernel.
    pub kernel_frame: CMat,
}

fn kernel_projection(h: &CMat) -> CMat {
    // for σ(H) ⊂ {−i, 0, i} semisimple, 1 + H² projects onto ker H
    CMat::identity(h.rows()) + &(h * h)
}

fn check_flat(h: &CMat) -> Result<()> {
    let res = (&(h * h * h) + h).norm();
    let scale = h.norm().max(1.0).powi(3);
    if !(res <= 1e-6 * scale) {
        return Err(KreinError::InvalidInput(format!("operator is not flat (‖H³ + H‖ = {res:.3e})")));
    }
    Ok(())
}

fn kernel_of(h: &CMat, k: &KreinStructure, tol: &ToleranceConfig) -> Result<(CMat, usize, InertiaPair)> {
    let p0 = kernel_projection(h);
    let dim = p0.trace().re.round().max(0.0) as usize;
    let frame = range_frame(&p0, dim);
    let nu = form_inertia(&frame, k, tol.zero)?;
    Ok((frame, dim, nu))
}

fn expected_kernel_ok(kind: Option<RealKind>, nu: InertiaPair) -> bool {
    match kind.map(|k| (k.eta, k.tau)) {
        Some((1, -1)) => nu.nu_plus + nu.nu_minus == 0,
        Some((-1, -1)) => nu == InertiaPair::new(0, 0) || nu == InertiaPair::new(1, 1),
        _ => nu.nu_plus == 0 || nu.nu_minus == 0,
    }
}

/// H_t = H + t·Ψ n V n⁻¹ j⁻¹ Ψ* J on the kernel of a flat H.
pub fn lift_kernel(h_flat: &CMat, k: &KreinStructure, rs: Option<&RealStructure>, tol: &ToleranceConfig) -> Result<Lifting> {
    check_hermitian_member(h_flat, k, tol)?;
    check_flat(h_flat)?;
    let (psi0, m, input_kernel) = kernel_of(h_flat, k, tol)?;
    let x = if m == 0 {
        CMat::zeros(k.dim(), k.dim())
    } else {
        let f = prepare_frame(&psi0, k, rs)?;
        let j_inv = hermitian_function(&f.j, |x| c(1.0 / x, 0.0))?;
        &f.psi * &f.n * &f.v * &f.n_inv * &j_inv * k.right(&f.psi.adjoint())
    };
    let lifted = h_flat + &x;
    let (kernel_frame, kernel_dim, kernel_inertia) = kernel_of(&lifted, k, tol)?;
    if !expected_kernel_ok(rs.map(|r| r.kind), kernel_inertia) {
        return Err(KreinError::FramePreparationFailed(format!("kernel inertia ({}, {}) after the lift", kernel_inertia.nu_plus, kernel_inertia.nu_minus)));
    }
    let (h0, x0) = (h_flat.clone(), x);
    let path = OperatorPath::new(OperatorKind::Hermitian, *k, rs.cloned(), 0.0, 1.0, move |t| Ok(&h0 + &x0.scale_re(t)));
    Ok(Lifting { path, lifted, input_kernel, kernel_inertia, kernel_dim, kernel_frame })
}

/// Class of the Lagrangian unitaries u± for a Real kind.
pub fn unitary_class(kind: Option<RealKind>) -> MatrixClass {
    match kind.map(|k| (k.eta, k.tau)) {
        None => MatrixClass::Complex,
        Some((1, 1)) => MatrixClass::Real,
        Some((-1, 1)) => MatrixClass::Quaternionic,
        Some((1, -1)) => MatrixClass::Symmetric,
        Some(_) => MatrixClass::Antisymmetric,
    }
}

#[derive(Debug, Clone)]
pub struct LagrangianFrames {
    pub u_plus: CMat,
    pub u_minus: CMat,
    pub p_plus: CMat,
    pub p_minus: CMat,
    /// Smallest singular value of u₋*u₊ − 1.
    pub certificate: f64,
    pub isotropy_residual: f64,
    pub embedding_residual: f64,
    /// Class residual of u± before projection onto the class.
    pub class_residual: f64,
}

fn split_rows(phi: &CMat, n: usize) -> (CMat, CMat) {
    (phi.submatrix(0, n, 0, phi.cols()), phi.submatrix(n, n, 0, phi.cols()))
}

/// Graph frame (u; 1)/√2.
pub fn graph_frame(u: &CMat) -> CMat {
    u.vstack(&CMat::identity(u.cols())).scale_re(std::f64::consts::FRAC_1_SQRT_2)
}

/// P± = Φ±(Φ∓*JΦ±)⁻¹Φ∓*J for Φ± = (u±; 1)/√2.
pub fn projections_from_unitaries(u_plus: &CMat, u_minus: &CMat) -> Result<(CMat, CMat)> {
    let n = u_plus.rows();
    let k = make_standard(n, n);
    let fp = graph_frame(u_plus);
    let fm = graph_frame(u_minus);
    let proj = |a: &CMat, b: &CMat| -> Result<CMat> {
        let bj = k.right(&b.adjoint());
        Ok(a * inverse(&(&bj * a))? * bj)
    };
    Ok((proj(&fp, &fm)?, proj(&fm, &fp)?))
}

/// u± from the graph representation of range(P±) in the J-grading.
pub fn lagrangian_frames(h: &CMat, k: &KreinStructure, rs: Option<&RealStructure>, tol: &ToleranceConfig) -> Result<LagrangianFrames> {
    if k.n_plus != k.n_minus {
        return Err(KreinError::InvalidInput(format!("Lagrangian frames need N+ = N- (got {}, {})", k.n_plus, k.n_minus)));
    }
    check_hermitian_member(h, k, tol)?;
    let n = k.n_plus;
    let (p_plus, p_minus) = half_plane_projections(h, k, rs, tol)?;
    let class = unitary_class(rs.map(|r| r.kind));
    let mut iso = 0.0f64;
    let mut cls_res = 0.0f64;
    let mut us = Vec::new();
    for p in [&p_plus, &p_minus] {
        let tr = p.trace().re;
        if !((tr - n as f64).abs() <= 1e-6) {
            return Err(KreinError::NotLagrangian { residual: (tr - n as f64).abs() });
        }
        let phi = range_frame(p, n);
        iso = iso.max(phi.adjoint_mul(&k.left(&phi)).norm());
        let (a, b) = split_rows(&phi, n);
        let u = polar_unitary(&a)? * polar_unitary(&b)?.adjoint();
        cls_res = cls_res.max(class_residual(&u, class)?);
        us.push((polar_unitary(&class_projection(&u, class)?)?, phi));
    }
    if !(iso <= CHECK_TOL) {
        return Err(KreinError::NotLagrangian { residual: iso });
    }
    let mut emb = 0.0f64;
    for (u, phi) in &us {
        let g = graph_frame(u);
        emb = emb.max((&g - &(phi * phi.adjoint_mul(&g))).norm());
    }
    if !(emb <= 1e-7) {
        return Err(KreinError::NotLagrangian { residual: emb });
    }
    let (u_plus, u_minus) = (us[0].0.clone(), us[1].0.clone());
    let certificate = smallest_singular_value(&(u_minus.adjoint() * &u_plus - CMat::identity(n)));
    if !(certificate > CHECK_TOL) {
        return Err(KreinError::NotFredholmPair { smin: certificate });
    }
    Ok(LagrangianFrames { u_plus, u_minus, p_plus, p_minus, certificate, isotropy_residual: iso, embedding_residual: emb, class_residual: cls_res })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StraightenSymmetry {
    None,
    Symmetric,
    OddSymmetric,
    RealAvoidingOne,
    QuaternionicAvoidingOne,
}

impl StraightenSymmetry {
    pub fn for_kind(kind: Option<RealKind>) -> Self {
        match kind.map(|k| (k.eta, k.tau)) {
            None => StraightenSymmetry::None,
            Some((1, 1)) => StraightenSymmetry::RealAvoidingOne,
            Some((-1, 1)) => StraightenSymmetry::QuaternionicAvoidingOne,
            Some((1, -1)) => StraightenSymmetry::Symmetric,
            Some(_) => StraightenSymmetry::OddSymmetric,
        }
    }

    fn generator_class(&self) -> MatrixClass {
        match self {
            StraightenSymmetry::None => MatrixClass::Complex,
            StraightenSymmetry::RealAvoidingOne => MatrixClass::Real,
            StraightenSymmetry::QuaternionicAvoidingOne => MatrixClass::Quaternionic,
            StraightenSymmetry::Symmetric => MatrixClass::Symmetric,
            StraightenSymmetry::OddSymmetric => MatrixClass::OddSymmetric,
        }
    }
}

pub struct Straightening {
    pub path: OperatorPath,
    /// t ↦ u₋,t (u₊ stays fixed).
    pub u_minus_path: Arc<dyn Fn(f64) -> CMat + Send + Sync>,
    pub u_plus: CMat,
    pub min_certificate: f64,
    pub p_plus_end: CMat,
    pub p_minus_end: CMat,
}

/// Hermitian generator of exp(i((1 − t)h + tπ)) with h = −i log v (cut at 1),
/// shifted by π and projected into the class, so that v_t = −exp(i(1 − t)g).
fn shifted_generator(v: &CMat, class: MatrixClass) -> Result<CMat> {
    let h = unitary_log_hermitian(v)?;
    let g = &h - &CMat::identity(v.rows()).scale_re(std::f64::consts::PI);
    let g = generator_projection(&g, class)?;
    Ok(g)
}

fn gap_path(g: CMat) -> impl Fn(f64) -> CMat {
    move |t| matrix_exp(&g.scale(c(0.0, 1.0 - t))).scale_re(-1.0)
}

/// Path of u₋ to −u₊ keeping u₋*u₊ − 1 invertible, as an operator path
/// t ↦ i(P₊,t − P₋,t) on the standard (n, n) space.
pub fn straighten(u_plus: &CMat, u_minus: &CMat, symmetry: StraightenSymmetry, rs: Option<&RealStructure>, _tol: &ToleranceConfig) -> Result<Straightening> {
    let n = u_plus.rows();
    let cert0 = smallest_singular_value(&(u_minus.adjoint() * u_plus - CMat::identity(n)));
    if !(cert0 > CHECK_TOL) {
        return Err(KreinError::NotFredholmPair { smin: cert0 });
    }
    if let (Some(rs), true) = (rs, symmetry != StraightenSymmetry::for_kind(rs.map(|r| r.kind))) {
        return Err(KreinError::InvalidInput(format!("symmetry {symmetry:?} does not match kind {}", rs.kind)));
    }
    let up = u_plus.clone();
    let u_minus_path: Arc<dyn Fn(f64) -> CMat + Send + Sync> = match symmetry {
        StraightenSymmetry::None | StraightenSymmetry::RealAvoidingOne | StraightenSymmetry::QuaternionicAvoidingOne => {
            let v0 = u_minus.adjoint() * u_plus;
            let vt = gap_path(shifted_generator(&v0, symmetry.generator_class())?);
            Arc::new(move |t| &up * vt(t).adjoint())
        }
        StraightenSymmetry::Symmetric => {
            let w = factorize_unitary_any(u_plus, UnitaryClass::Symmetric)?;
            let x = w.transpose();
            let ut = x.adjoint() * u_minus * x.conj();
            let vt = gap_path(shifted_generator(&ut, MatrixClass::Symmetric)?);
            Arc::new(move |t| &x * vt(t) * x.transpose())
        }
        StraightenSymmetry::OddSymmetric => {
            let s = odd_s(n)?;
            let w = factorize_unitary_any(&(s.transpose() * u_plus), UnitaryClass::OddSymmetric)?;
            let x = w.transpose();
            let ut = x.adjoint() * u_minus * x.conj();
            let v0 = ut.adjoint() * &s;
            let vt = gap_path(shifted_generator(&v0, MatrixClass::OddSymmetric)?);
            Arc::new(move |t| &x * (&s * vt(t).adjoint()) * x.transpose())
        }
    };
    let cert = |t: f64, f: &dyn Fn(f64) -> CMat| smallest_singular_value(&(f(t).adjoint() * u_plus - CMat::identity(n)));
    let grid = 64;
    let mut min = (f64::INFINITY, 0.0);
    for i in 0..=grid {
        let t = i as f64 / grid as f64;
        let s = cert(t, &*u_minus_path);
        if s < min.0 {
            min = (s, t);
        }
    }
    // refine around the smallest sample
    let (lo, hi) = ((min.1 - 1.0 / grid as f64).max(0.0), (min.1 + 1.0 / grid as f64).min(1.0));
    for i in 0..=32 {
        let t = lo + (hi - lo) * i as f64 / 32.0;
        let s = cert(t, &*u_minus_path);
        if s < min.0 {
            min = (s, t);
        }
    }
    if !(min.0 > CHECK_TOL) {
        return Err(KreinError::PathBlocked { t: min.1, smin: min.0 });
    }
    let (p_plus_end, p_minus_end) = projections_from_unitaries(u_plus, &u_minus_path(1.0))?;
    let k = make_standard(n, n);
    let (up, ump) = (u_plus.clone(), u_minus_path.clone());
    let path = OperatorPath::new(OperatorKind::Hermitian, k, rs.cloned(), 0.0, 1.0, move |t| {
        let (pp, pm) = projections_from_unitaries(&up, &ump(t))?;
        Ok((pp - pm).scale(I))
    });
    Ok(Straightening { path, u_minus_path, u_plus: u_plus.clone(), min_certificate: min.0, p_plus_end, p_minus_end })
}

/// `i·[[0, u], [u*, 0]]`.
pub fn special_operator(u: &CMat) -> CMat {
    let n = u.rows();
    let mut h = CMat::zeros(2 * n, 2 * n);
    h.set_block(0, n, &u.scale(I));
    h.set_block(n, 0, &u.adjoint().scale(I));
    h
}

/// Kernel-removing reduction for kind (−1,−1): frame Φ_red of J·E^⊥ in
/// normal form and its left inverse L = J_red Φ_red* J.
pub(crate) fn reduce_off_kernel(kernel: &CMat, k: &KreinStructure, rs: &RealStructure) -> Result<(CMat, CMat)> {
    let phi0 = k.left(&complement_frame(kernel));
    let f = prepare_frame(&phi0, k, Some(rs))?;
    let phi = (&f.psi * &f.n).scale(I);
    let m = phi.cols() / 2;
    let kr = make_standard(m, m);
    let l = kr.left(&k.right(&phi.adjoint()));
    let res = (&l * &phi - CMat::identity(2 * m)).norm();
    if !(res <= CHECK_TOL) {
        return Err(KreinError::FramePreparationFailed(format!("reduced frame is not J-orthonormal ({res:.3e})")));
    }
    Ok((phi, l))
}

//! Seeded random matrix helpers.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::numerics::{c, CMat};

pub type Rng = ChaCha8Rng;

pub fn rng(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn normal(rng: &mut Rng) -> f64 {
    StandardNormal.sample(rng)
}

/// Entries i.i.d. complex Gaussian with unit variance per entry.
pub fn complex_gaussian(rng: &mut Rng, rows: usize, cols: usize) -> CMat {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    CMat::from_fn(rows, cols, |_, _| c(s * normal(rng), s * normal(rng)))
}

pub fn real_gaussian(rng: &mut Rng, rows: usize, cols: usize) -> CMat {
    CMat::from_fn(rows, cols, |_, _| c(normal(rng), 0.0))
}

/// Hermitian matrix with O(1) entries.
pub fn hermitian(rng: &mut Rng, n: usize) -> CMat {
    let g = complex_gaussian(rng, n, n);
    (&g + &g.adjoint()).scale_re(0.5)
}

/// Haar-ish unitary from the polar factor of a Gaussian matrix.
pub fn unitary(rng: &mut Rng, n: usize) -> CMat {
    let g = complex_gaussian(rng, n, n);
    crate::numerics::polar_unitary(&g).expect("Gaussian matrix is invertible almost surely")
}

pub fn uniform(rng: &mut Rng, lo: f64, hi: f64) -> f64 {
    use rand::Rng as _;
    rng.gen_range(lo..hi)
}

pub fn uniform_usize(rng: &mut Rng, lo: usize, hi_inclusive: usize) -> usize {
    use rand::Rng as _;
    rng.gen_range(lo..=hi_inclusive)
}

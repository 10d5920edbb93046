//! Finite-dimensional numerics for Krein spaces.
//!
//! Computes Krein inertia and signature invariants of J-unitary and
//! J-hermitian matrices (optionally with a Real symmetry), tracks eigenvalue
//! collisions along operator paths, transports invariants through Cayley
//! transforms and runs explicit homotopy retractions to model operators.

pub mod cayley;
pub mod cli;
pub mod error;
pub mod fixtures;
pub mod homotopy;
pub mod io;
pub mod krein;
pub mod random;
pub mod realsym;
pub mod retraction;
pub mod signature;
pub mod spectral;
pub mod numerics;
pub mod tolerance;

pub use error::{KreinError, Result};
pub use numerics::{CMat, C64};
pub use tolerance::ToleranceConfig;

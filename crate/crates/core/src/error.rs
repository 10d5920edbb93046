//! Error type shared by every module.

use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum KreinError {
    #[error("matrix is singular (pivot {pivot:.3e} below threshold {threshold:.3e})")]
    SingularMatrix { pivot: f64, threshold: f64 },
    #[error("QR iteration did not converge after {iterations} iterations")]
    NoConvergence { iterations: usize },
    #[error("matrix is not hermitian (residual {residual:.3e})")]
    NotHermitian { residual: f64 },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: String, got: String },
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("form is numerically singular (smallest |eigenvalue| {min_abs:.3e})")]
    SingularForm { min_abs: f64 },
    #[error("no separating contour around cluster centred at {center}")]
    NoSeparatingContour { center: Complex64 },
    #[error("contour quadrature did not converge (idempotency residual {residual:.3e} at {points} points)")]
    QuadratureDivergence { residual: f64, points: usize },
    #[error("eigenvalue {lambda} is ambiguously close to the region boundary (distance {distance:.3e})")]
    AmbiguousClassification { lambda: Complex64, distance: f64 },
    #[error("no reflected partner found for cluster at {center}")]
    UnmatchedReflection { center: Complex64 },
    #[error("finite-rank correction failed: smallest singular value {smin:.3e}")]
    CorrectionFailed { smin: f64 },
    #[error("degenerate Krein form on cluster at {center} (eigenvalue {value:.3e})")]
    DegenerateForm { center: Complex64, value: f64 },
    #[error("odd on-circle/on-axis dimension {dim}")]
    OddDimension { dim: usize },
    #[error("invalid Cayley parameters: {0}")]
    InvalidCayleyParams(String),
    #[error("spectrum too close to {point} (distance {distance:.3e})")]
    SpectrumTooClose { point: Complex64, distance: f64 },
    #[error("cluster matching through the Cayley map failed at {lambda}")]
    ClusterMatchFailed { lambda: Complex64 },
    #[error("incompatible dimensions ({n_plus},{n_minus}) for kind ({eta},{tau})")]
    IncompatibleDimensions { eta: i8, tau: i8, n_plus: usize, n_minus: usize },
    #[error("spectral symmetry violated at eigenvalue {lambda}")]
    SymmetryViolated { lambda: Complex64 },
    #[error("invariant constraint violated: {0}")]
    InvariantConstraintViolated(String),
    #[error("step underflow while tracking between t={t_lo} and t={t_hi}")]
    StepUnderflow { t_lo: f64, t_hi: f64 },
    #[error("unresolved event between t={t_lo} and t={t_hi}")]
    UnresolvedEvent { t_lo: f64, t_hi: f64 },
    #[error("unknown scenario `{0}`")]
    UnknownScenario(String),
    #[error("path sample at t={t} fails membership (residual {residual:.3e})")]
    PathMembership { t: f64, residual: f64 },
    #[error("subspace is J-degenerate (smallest |eigenvalue| of the form {min_abs:.3e})")]
    DegenerateSubspace { min_abs: f64 },
    #[error("subspace is not invariant (residual {residual:.3e})")]
    NotInvariant { residual: f64 },
    #[error("frame preparation failed: {0}")]
    FramePreparationFailed(String),
    #[error("ranges are not Lagrangian (residual {residual:.3e})")]
    NotLagrangian { residual: f64 },
    #[error("not a Fredholm pair (smallest singular value {smin:.3e})")]
    NotFredholmPair { smin: f64 },
    #[error("straightening path blocked at t={t} (certificate {smin:.3e})")]
    PathBlocked { t: f64, smin: f64 },
    #[error("unitary not in declared class (residual {residual:.3e})")]
    NotInClass { residual: f64 },
    #[error("unitary not gapped at 1 (distance {distance:.3e})")]
    NotGapped { distance: f64 },
    #[error("retraction stage `{stage}` failed: {source}")]
    Stage { stage: String, source: Box<KreinError> },
    #[error("fixture `{name}` mismatch: {diff}")]
    FixtureMismatch { name: String, diff: String },
    #[error("io error: {0}")]
    Io(String),
}

impl KreinError {
    pub fn at_stage(self, stage: &str) -> KreinError {
        KreinError::Stage { stage: stage.to_string(), source: Box::new(self) }
    }
}

pub type Result<T> = std::result::Result<T, KreinError>;

//! Numerical certification of geodesic-orbit homogeneous spaces.
//!
//! The crate builds compact matrix Lie algebras as real skew-symmetric
//! matrices, assembles cataloged homogeneous-space decompositions
//! `g = h + l + m`, and then decides, by sampled linear algebra:
//!
//! * whether an invariant metric on `G/H` is geodesic-orbit (three
//!   independent criteria, cross-validated);
//! * the differential dimension/index and complexity of the algebra of
//!   invariant polynomials on the isotropy module;
//! * commutativity and completeness of explicit polynomial families;
//! * trajectory-level properties of homogeneous geodesics (unit-norm
//!   preservation, planarity, closure dimension of the orbit torus).
//!
//! All verdicts carry residuals and thresholds; sampling is seeded and
//! deterministic.

pub mod catalog;
pub mod flow;
pub mod goverify;
pub mod homspace;
pub mod kernels;
pub mod liealg;
pub mod poisson;
pub mod report;
pub mod structure;

use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("unsupported algebra: {0}")]
    UnsupportedAlgebra(String),
    #[error("element owner mismatch: expected {expected}, got {got}")]
    OwnerMismatch { expected: String, got: String },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("rank-deficient input basis: expected rank {expected}, got {got}")]
    DegenerateBasis { expected: usize, got: usize },
    #[error("matrix exponential argument norm {0:.3e} exceeds the 1e6 bound")]
    ExpOverflow(f64),
    #[error("unknown catalog id `{0}`")]
    UnknownCatalog(String),
    #[error("parameter out of range: {0}")]
    ParamOutOfRange(String),
    #[error("structural invariant `{what}` failed with residual {residual:.3e}")]
    StructuralInvariant { what: String, residual: f64 },
    #[error("invalid metric: {0}")]
    InvalidMetric(String),
    #[error("quadratic form not positive definite: min eigenvalue {0:.6e}")]
    IndefiniteForm(f64),
    #[error("no base point cataloged for `{0}`")]
    MissingBasePoint(String),
    #[error("metric is not geodesic-orbit on this space: {0}")]
    NotGeodesicOrbit(String),
    #[error("recipe not applicable: {0}")]
    InapplicableRecipe(String),
    #[error("family does not commute: |{{ {f}, {g} }}| = {residual:.3e}")]
    NonCommutingFamily { f: String, g: String, residual: f64 },
    #[error("polynomials live on different domains")]
    DomainMismatch,
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;

/// Numerical thresholds used across every module. The defaults are the
/// recorded ones; all reports echo the values actually used.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct Tolerances {
    /// Absolute zero threshold after unit normalization.
    pub eps_zero: f64,
    /// Relative singular-value threshold for rank decisions.
    pub svd_rel_tol: f64,
    /// Residuals below this accept a solvability claim.
    pub accept_tol: f64,
    /// Residuals above this reject it; the gap in between is reported
    /// as indeterminate rather than silently coerced.
    pub reject_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            eps_zero: 1e-9,
            svd_rel_tol: kernels::DEFAULT_SVD_REL_TOL,
            accept_tol: 1e-8,
            reject_tol: 1e-4,
        }
    }
}

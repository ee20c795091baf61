//! Numerical verification of tetrahedral properties on a catalog of metric
//! spaces.
//!
//! A point `p` of a metric space has the `(C, alpha, beta)`-tetrahedral
//! property for radius `r` when apex points on the sphere `S(p; r)` exist such
//! that every simultaneous sphere intersection with radii drawn from
//! `[alpha*r, beta*r]` consists of points separated by at least `C*r`. The
//! crate computes those intersections numerically, evaluates the separation
//! infimum (the h-function), certifies or refutes the property, and checks the
//! integral, volume, and packing consequences that follow from it.
//!
//! Modules mirror the pipeline: [`spaces`] knows the catalog metrics,
//! [`slicer`] solves sphere systems and evaluates h, [`checker`] runs the
//! property test, [`integrals`]/[`volume`]/[`bounds`] evaluate the derived
//! estimates, and [`gallery`] reproduces the known closed-form thresholds.

pub mod bounds;
pub mod checker;
pub mod cli;
pub mod gallery;
pub mod integrals;
pub mod slicer;
pub mod spaces;
pub mod volume;

use thiserror::Error;

/// Crate-wide error type. Inputs rejected by an operation's preconditions
/// map to dedicated variants so callers (and the C API) can branch on them.
#[derive(Debug, Error)]
pub enum Error {
    #[error("mismatched spaces: {0}")]
    MismatchedSpaces(String),
    #[error("invalid chart: {0}")]
    InvalidChart(String),
    #[error("invalid space: {0}")]
    InvalidSpace(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("empty region: {0}")]
    EmptyRegion(String),
    #[error("apex off sphere: |d(p, apex) - r| = {deviation:e} exceeds tolerance {tolerance:e}")]
    ApexOffSphere { deviation: f64, tolerance: f64 },
    #[error("apexes missing: provide n-1 apex points or run an apex search first")]
    MissingApexes,
    #[error("dimension {n} exceeds cap {cap}: grid cost grows as grid_m^(n-1)")]
    DimensionCap { n: usize, cap: usize },
    #[error("method unavailable: {0}")]
    MethodUnavailable(String),
    #[error(
        "mixed sheet dimensions: plane sheet has area {plane_area}, ray sheet has length {ray_length}; \
         no single Hausdorff volume exists"
    )]
    MixedDimension { plane_area: f64, ray_length: f64 },
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

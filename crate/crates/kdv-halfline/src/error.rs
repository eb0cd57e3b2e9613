//! Error type shared by every module in the crate.

use thiserror::Error;

/// Crate-wide error enumeration.
#[derive(Debug, Error)]
pub enum Error {
    #[error("grid must have at least {min} points, got {got}")]
    GridTooSmall { min: usize, got: usize },

    #[error("grid extent must be positive and finite, got {0}")]
    BadExtent(f64),

    #[error("wave speed c must be positive and finite, got {0}")]
    BadSpeed(f64),

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("derivative order must be 1, 2 or 3, got {0}")]
    BadDerivativeOrder(u32),

    #[error("{what} must be positive and finite, got {value}")]
    BadParameter { what: &'static str, value: f64 },

    #[error("boundary-condition count does not match the problem: {0}")]
    BoundaryConditionMismatch(&'static str),

    #[error("nonlinear iteration failed to reach tol {tol:.3e} at step {step} (residual {residual:.3e} after {iters} iterations)")]
    NonlinearDivergence {
        step: usize,
        iters: usize,
        residual: f64,
        tol: f64,
    },

    #[error("non-finite value detected at step {step}")]
    NonFinite { step: usize },

    #[error("trajectory carries no boundary traces")]
    MissingTraces,

    #[error("initial datum does not vanish at x = 0 (|v(0)| = {0:.3e})")]
    NonzeroBoundaryValue(f64),

    #[error("translation fit did not converge after {iters} iterations (|F| = {residual:.3e})")]
    FitDivergence { iters: usize, residual: f64 },

    #[error("state lies outside the tubular neighborhood of the soliton family (distance {distance:.3e}, radius {radius:.3e})")]
    OutsideTube { distance: f64, radius: f64 },

    #[error("fit derivative degenerate (|dF/drho| = {0:.3e}); soliton mass on the domain is too small")]
    DegenerateFit(f64),

    #[error("translation fit failed at snapshot {index}: {source}")]
    TrackingFailure {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("potential center {center} too close to the truncation boundary (extent {extent})")]
    CenterOutOfRange { center: f64, extent: f64 },

    #[error("eigensolver failed: {0}")]
    EigenFailure(&'static str),

    #[error("coercivity constant is not positive: kappa = {0:.6e}")]
    NonPositiveCoercivity(f64),

    #[error("banded matrix is numerically singular at pivot {0}")]
    SingularMatrix(usize),

    #[error("{file}: {what}")]
    Format { file: String, what: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

use thiserror::Error;

/// Errors raised by the numerical kernels.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("field contains non-finite samples")]
    FieldNotFinite,

    #[error("grid mismatch between operands")]
    GridMismatch,

    #[error("negative-order operator applied to a field with nonzero mean (|zero mode| = {0:e})")]
    NonZeroMean(f64),

    #[error("invalid norm order {0}")]
    InvalidNormOrder(f64),

    #[error("eigenvalue routine failed to converge")]
    EigenSolve,

    #[error("hypothesis (H0) violated: spectral margin {0:e} is not positive")]
    H0Violated(f64),

    #[error("flow inversion diverged after {iterations} Newton iterations (residual {residual:e})")]
    NewtonDiverged { iterations: usize, residual: f64 },

    #[error("dimension error: {0}")]
    Dimension(String),

    #[error("negative density {0:e} below floor")]
    NegativeDensity(f64),

    #[error("time step {dt:e} exceeds CFL bound {bound:e}")]
    CflViolation { dt: f64, bound: f64 },

    #[error("health bound violated at t = {t}: min rho = {min_rho:e}")]
    HealthViolation { t: f64, min_rho: f64 },

    #[error("fit window holds {found} samples, need at least {needed}")]
    InsufficientWindow { found: usize, needed: usize },

    #[error("step size collapsed to {step:e} at t = {t} (blow-up)")]
    Stiffness { t: f64, step: f64 },

    #[error("parameter out of range: {0}")]
    Domain(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("admissibility rejected: {0}")]
    Inadmissible(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

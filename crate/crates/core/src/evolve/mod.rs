//! Method-of-lines integration of the perturbation system for `(rho, w)` around the
//! reference Burgers flow `v`:
//!
//! ```text
//! d rho/dt = -J[(w + v).grad rho + (gamma-1)/2 rho (div w + div v)]
//! d w/dt   = -J[(w + v).grad w + (gamma-1)/2 rho grad rho + w.grad v] + kappa grad phi
//! ```
//!
//! `J` is the sharp spectral truncation at the dealiasing radius, and products are formed
//! pointwise on the grid.

mod admissibility;
mod makino;
mod model;
mod run;

pub use admissibility::{admissibility_check, Admissibility};
pub use makino::{makino_inverse, makino_prefactor, makino_transform, NEGATIVE_FLOOR};
pub use model::{
    bb_rhs, horizon_guard, rk4_step, rk4_step_with_factor, GuardSignal, MakinoState, Model, StateInfo,
    CFL_FACTOR, GUARD_EDGE_FRACTION, GUARD_THRESHOLD, HEALTH_FLOOR,
};
pub use run::{
    build_initial, integrate, integrate_from, InitialData, Profile, Record, RunConfig, StepControl, StopReason,
    Trajectory, VelocityKind, DEFAULT_DELTA,
};

//! Decay exponents and power-law fits, mass, the ODE bootstrap lemma, and ratio
//! statistics for the commutator and composition inequalities.

mod exponents;
pub mod ineq;
mod ode;
mod series;

pub use exponents::{decay_exponents, DecayExponents};
pub use ineq::{ensemble_max_ratio, ensemble_member, ineq_ratio, EnsembleSpec, EnsembleStats, IneqKind, IneqSides};
pub use ode::{bisect_threshold, ode_lemma_run, OdeParams, OdeRun, ODE_RTOL};
pub use series::{
    bounded_by_reference, decay_fit, fit_power_law, BoundCheck, DecayFit, NormSeries, MIN_FIT_SAMPLES,
};

use crate::coupling::PhysParams;
use crate::error::Result;
use crate::evolve::{makino_inverse, MakinoState};

/// Total mass `int varrho dx` by box quadrature, with `varrho` recovered from `rho`.
pub fn mass(state: &MakinoState, params: &PhysParams) -> Result<f64> {
    Ok(makino_inverse(&state.rho, params)?.integral())
}

/// Whether finite, conserved mass is expected (`gamma <= 2`).
pub fn mass_is_finite_claim(params: &PhysParams) -> bool {
    params.gamma <= 2.0
}

//! Pseudo-spectral laboratory for the compressible Euler system in Makino variables,
//! coupled to Poisson or Helmholtz potentials, integrated as a perturbation of an
//! exactly evaluated multi-dimensional Burgers flow.
//!
//! Modules, bottom-up:
//!
//! - [`spectral`]: periodic grids, fields, `Lambda^s`, Sobolev norms, `J_n`, gradients.
//! - [`burgers`]: the reference flow by characteristics and its decay diagnostics.
//! - [`coupling`]: physical parameters, density power and the potential gradient.
//! - [`evolve`]: the perturbation system, RK4 stepping, admissibility and runs.
//! - [`diagnostics`]: decay exponents and fits, mass, the ODE bootstrap lemma and
//!   numerical checks of the commutator and composition inequalities.

pub mod burgers;
pub mod coupling;
pub mod diagnostics;
pub mod error;
pub mod evolve;
pub mod linalg;
pub mod spectral;

pub use error::{Error, Result};

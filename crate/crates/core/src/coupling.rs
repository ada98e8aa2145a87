//! Potential solve `Delta phi - mu^2 phi = G~ rho_+^{2/(gamma-1)}` and the forcing `kappa grad phi`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{friedrichs_project, Grid, ScalarField, VectorField};

/// Relative slack on the per-solve Helmholtz bound.
const HELMHOLTZ_SLACK: f64 = 1e-10;
/// Negative densities below `-CLAMP_WARN * max rho` count as clamping events.
pub const CLAMP_WARN: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CouplingCase {
    Euler,
    Poisson,
    Helmholtz,
}

/// Gas and coupling constants. `G~` is derived, never stored.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysParams {
    pub gamma: f64,
    #[serde(rename = "a")]
    pub pressure_const: f64,
    #[serde(default)]
    pub kappa: f64,
    #[serde(default)]
    pub mu: f64,
    #[serde(rename = "g", default = "one")]
    pub grav: f64,
}

fn one() -> f64 {
    1.0
}

impl PhysParams {
    pub fn new(gamma: f64, pressure_const: f64, kappa: f64, mu: f64, grav: f64) -> Result<Self> {
        let p = Self {
            gamma,
            pressure_const,
            kappa,
            mu,
            grav,
        };
        p.validate()?;
        Ok(p)
    }

    /// Pure Euler with the given adiabatic exponent and `A = 1`.
    pub fn euler(gamma: f64) -> Result<Self> {
        Self::new(gamma, 1.0, 0.0, 0.0, 1.0)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParams(m.into()));
        if !(self.gamma > 1.0) || !self.gamma.is_finite() {
            return bad("gamma must be a finite number above 1");
        }
        if !(self.pressure_const > 0.0) || !self.pressure_const.is_finite() {
            return bad("pressure constant A must be positive");
        }
        if !self.kappa.is_finite() {
            return bad("kappa must be finite");
        }
        if !(self.mu >= 0.0) || !self.mu.is_finite() {
            return bad("mu must be nonnegative");
        }
        if !(self.grav > 0.0) || !self.grav.is_finite() {
            return bad("G must be positive");
        }
        Ok(())
    }

    pub fn case(&self) -> CouplingCase {
        if self.kappa == 0.0 {
            CouplingCase::Euler
        } else if self.mu == 0.0 {
            CouplingCase::Poisson
        } else {
            CouplingCase::Helmholtz
        }
    }

    /// `4 pi G ((gamma-1)^2 / (4 A gamma))^{1/(gamma-1)}`.
    pub fn g_tilde(&self) -> f64 {
        let g1 = self.gamma - 1.0;
        4.0 * std::f64::consts::PI
            * self.grav
            * (g1 * g1 / (4.0 * self.pressure_const * self.gamma)).powf(1.0 / g1)
    }

    /// Exponent `2/(gamma-1)` of the density power.
    pub fn density_exponent(&self) -> f64 {
        2.0 / (self.gamma - 1.0)
    }
}

/// Clamped, dealiased density power with its health record.
#[derive(Clone, Debug)]
pub struct DensityPower {
    pub field: ScalarField,
    pub min_rho: f64,
    /// True when `min rho < -1e-8 max rho`.
    pub clamped: bool,
}

/// `max(rho, 0)^{2/(gamma-1)}` truncated at the dealiasing radius.
pub fn density_power(rho: &ScalarField, gamma: f64) -> Result<DensityPower> {
    if !(gamma > 1.0) {
        return Err(Error::InvalidParams("gamma must exceed 1".into()));
    }
    let e = 2.0 / (gamma - 1.0);
    let raw = rho.map(|r| pow_clamped(r, e))?;
    let field = friedrichs_project(&raw, rho.grid().dealias_radius())?;
    let min_rho = rho.min();
    Ok(DensityPower {
        field,
        min_rho,
        clamped: min_rho < -CLAMP_WARN * rho.max().max(0.0),
    })
}

#[inline]
pub(crate) fn pow_clamped(r: f64, e: f64) -> f64 {
    if r <= 0.0 {
        0.0
    } else if e == 1.0 {
        r
    } else if e == 2.0 {
        r * r
    } else {
        r.powf(e)
    }
}

fn check_dimension(params: &PhysParams, dim: usize, allow_unsafe: bool) -> Result<()> {
    if allow_unsafe {
        return Ok(());
    }
    match params.case() {
        CouplingCase::Poisson if dim < 3 => Err(Error::Dimension("Poisson requires d≥3".into())),
        CouplingCase::Helmholtz if dim < 2 => {
            Err(Error::Dimension("Helmholtz requires d≥2".into()))
        }
        _ => Ok(()),
    }
}

/// Spectral `grad phi` from the coefficients of the (already dealiased) source.
///
/// The zero mode never contributes to the gradient; in the Poisson case it is the
/// discarded background mean.
pub fn potential_gradient_spectra(
    grid: &Grid,
    source: &[Complex64],
    params: &PhysParams,
) -> Vec<Vec<Complex64>> {
    let gt = params.g_tilde();
    let mu2 = params.mu * params.mu;
    let mut out = vec![vec![Complex64::new(0.0, 0.0); grid.len()]; grid.dim()];
    for (k, (&f, &x2)) in source.iter().zip(grid.xi_sq()).enumerate() {
        let denom = x2 + mu2;
        if denom == 0.0 {
            continue;
        }
        let xi = grid.deriv_wavevector(k);
        let c = f * (-gt / denom);
        for (j, o) in out.iter_mut().enumerate() {
            // i xi_j * c
            o[k] = Complex64::new(-xi[j] * c.im, xi[j] * c.re);
        }
    }
    out
}

/// Result of one potential solve.
#[derive(Clone, Debug)]
pub struct PotentialSolve {
    pub grad_phi: VectorField,
    /// Mean of the source removed before a Poisson inversion (zero otherwise).
    pub discarded_mean: f64,
    pub source: DensityPower,
}

/// `grad phi` for the source `G~ rho_+^{2/(gamma-1)}`.
///
/// Returns the zero field for pure Euler. Poisson needs `d >= 3` and Helmholtz `d >= 2`
/// unless `allow_unsafe` is set.
pub fn potential_gradient(
    rho: &ScalarField,
    params: &PhysParams,
    allow_unsafe: bool,
) -> Result<PotentialSolve> {
    params.validate()?;
    let grid = rho.grid();
    check_dimension(params, grid.dim(), allow_unsafe)?;
    let source = density_power(rho, params.gamma)?;
    if params.case() == CouplingCase::Euler {
        return Ok(PotentialSolve {
            grad_phi: VectorField::zeros(grid),
            discarded_mean: 0.0,
            source,
        });
    }
    let spec = source.field.spectrum();
    let discarded_mean = if params.case() == CouplingCase::Poisson { spec[0].re } else { 0.0 };
    let spectra = potential_gradient_spectra(grid, spec, params);
    let grad_phi = VectorField::new(
        spectra
            .into_iter()
            .map(|s| ScalarField::from_spectrum(grid, s))
            .collect::<Result<Vec<_>>>()?,
    )?;
    if params.case() == CouplingCase::Helmholtz {
        let bound = params.g_tilde() / (2.0 * params.mu) * source.field.l2_norm();
        let got = grad_phi.l2_norm();
        if got > bound * (1.0 + HELMHOLTZ_SLACK) + f64::MIN_POSITIVE {
            return Err(Error::Domain(format!(
                "Helmholtz bound violated: {got:e} > {bound:e}"
            )));
        }
    }
    Ok(PotentialSolve {
        grad_phi,
        discarded_mean,
        source,
    })
}

/// The potential itself, with the Poisson zero mode set to zero.
pub fn potential(rho: &ScalarField, params: &PhysParams, allow_unsafe: bool) -> Result<ScalarField> {
    params.validate()?;
    let grid = rho.grid();
    check_dimension(params, grid.dim(), allow_unsafe)?;
    if params.case() == CouplingCase::Euler {
        return Ok(ScalarField::zeros(grid));
    }
    let source = density_power(rho, params.gamma)?;
    let gt = params.g_tilde();
    let mu2 = params.mu * params.mu;
    let spec = source
        .field
        .spectrum()
        .iter()
        .zip(grid.xi_sq())
        .map(|(&f, &x2)| {
            let denom = x2 + mu2;
            if denom == 0.0 {
                Complex64::new(0.0, 0.0)
            } else {
                f * (-gt / denom)
            }
        })
        .collect();
    ScalarField::from_spectrum(grid, spec)
}

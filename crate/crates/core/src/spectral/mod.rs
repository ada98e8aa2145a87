//! Periodic grids, FFT-backed fields and the Fourier-multiplier operators built on them.
//!
//! Conventions: the forward transform carries `1/N^d`, frequencies are physical
//! (`xi = 2 pi k / L`), and first-order derivatives drop the Nyquist mode. With
//! these, `sobolev_norm(f, 0)` equals the continuum `L^2` norm of the sampled
//! trigonometric polynomial on the box.

mod field;
mod grid;

pub use field::{Components, ScalarField, VectorField};
pub use grid::{Grid, Point};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative tolerance on the zero mode for negative-order operators.
pub const ZERO_MODE_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormMode {
    /// `\dot H^sigma`: `sum |xi|^{2 sigma} |f^|^2`.
    Homogeneous,
    /// `H^sigma` as `sqrt(|f|_{L^2}^2 + |f|_{\dot H^sigma}^2)`.
    Inhomogeneous,
}

/// Order and flavour of a Sobolev norm.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormSpec {
    order: f64,
    mode: NormMode,
}

impl NormSpec {
    pub fn new(order: f64, mode: NormMode) -> Result<Self> {
        if !order.is_finite() || order < 0.0 {
            return Err(Error::InvalidNormOrder(order));
        }
        Ok(Self { order, mode })
    }

    pub fn homogeneous(order: f64) -> Result<Self> {
        Self::new(order, NormMode::Homogeneous)
    }

    pub fn inhomogeneous(order: f64) -> Result<Self> {
        Self::new(order, NormMode::Inhomogeneous)
    }

    pub fn order(&self) -> f64 {
        self.order
    }

    pub fn mode(&self) -> NormMode {
        self.mode
    }
}

fn check_zero_mode(f: &ScalarField) -> Result<()> {
    let spec = f.spectrum();
    let total: f64 = spec.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let zero = spec[0].norm();
    if zero > ZERO_MODE_TOL * total.max(f64::MIN_POSITIVE) {
        return Err(Error::NonZeroMean(zero));
    }
    Ok(())
}

/// Multiplies the spectrum by `|xi|^s`.
///
/// The zero mode maps to zero. For `s < 0` the field must have (numerically) zero mean.
pub fn frac_lambda(f: &ScalarField, s: f64) -> Result<ScalarField> {
    if !s.is_finite() {
        return Err(Error::Domain(format!("order {s} is not finite")));
    }
    if s < 0.0 {
        check_zero_mode(f)?;
    }
    let grid = f.grid();
    let half = 0.5 * s;
    let out: Vec<Complex64> = f
        .spectrum()
        .iter()
        .zip(grid.xi_sq())
        .map(|(&c, &x2)| if x2 == 0.0 { Complex64::new(0.0, 0.0) } else { c * x2.powf(half) })
        .collect();
    ScalarField::from_spectrum(grid, out)
}

/// `sum_xi |xi|^{2 sigma} |f^(xi)|^2` scaled to the box; zero mode kept only for `sigma = 0`.
fn weighted_energy(f: &ScalarField, sigma: f64) -> f64 {
    let grid = f.grid();
    let sum: f64 = if sigma == 0.0 {
        f.spectrum().iter().map(|z| z.norm_sqr()).sum()
    } else {
        f.spectrum()
            .iter()
            .zip(grid.xi_sq())
            .skip(1)
            .map(|(z, &x2)| z.norm_sqr() * x2.powf(sigma))
            .sum()
    };
    sum * grid.volume()
}

fn check_finite<F: Components + ?Sized>(f: &F) -> Result<()> {
    for c in f.scalar_components() {
        if c.samples().iter().any(|x| !x.is_finite()) {
            return Err(Error::FieldNotFinite);
        }
    }
    Ok(())
}

/// Sobolev norm of a scalar or vector field (root-sum-square over components).
pub fn sobolev_norm<F: Components + ?Sized>(f: &F, spec: NormSpec) -> Result<f64> {
    check_finite(f)?;
    let comps = f.scalar_components();
    let hom: f64 = comps.iter().map(|c| weighted_energy(c, spec.order)).sum();
    let value = match spec.mode {
        NormMode::Homogeneous => hom,
        NormMode::Inhomogeneous if spec.order == 0.0 => hom,
        NormMode::Inhomogeneous => hom + comps.iter().map(|c| weighted_energy(c, 0.0)).sum::<f64>(),
    };
    Ok(value.sqrt())
}

/// Homogeneous seminorm of any real order. The zero mode is skipped unless `sigma = 0`,
/// which is how negative orders are read on fields with a mean.
pub fn homogeneous_seminorm<F: Components + ?Sized>(f: &F, sigma: f64) -> Result<f64> {
    if !sigma.is_finite() {
        return Err(Error::InvalidNormOrder(sigma));
    }
    check_finite(f)?;
    Ok(f.scalar_components()
        .iter()
        .map(|c| weighted_energy(c, sigma))
        .sum::<f64>()
        .sqrt())
}

/// Friedrichs truncation `J_n`: zeroes every mode with `|xi| >= radius`.
pub fn friedrichs_project(f: &ScalarField, radius: f64) -> Result<ScalarField> {
    if !(radius > 0.0) {
        return Err(Error::Domain(format!("truncation radius {radius} must be positive")));
    }
    let grid = f.grid();
    if radius > grid.max_abs_xi() {
        return Ok(f.clone());
    }
    let mut spec = f.spectrum().to_vec();
    truncate_spectrum(grid, &mut spec, radius);
    ScalarField::from_spectrum(grid, spec)
}

/// In-place `J_n` on raw coefficients.
pub fn truncate_spectrum(grid: &Grid, spec: &mut [Complex64], radius: f64) {
    let r2 = radius * radius;
    for (z, &x2) in spec.iter_mut().zip(grid.xi_sq()) {
        if x2 >= r2 {
            *z = Complex64::new(0.0, 0.0);
        }
    }
}

/// Coefficients of `d f / d x_axis` (Nyquist dropped).
pub fn derivative_spectrum(grid: &Grid, spec: &[Complex64], axis: usize) -> Vec<Complex64> {
    let n = grid.n();
    let stride = n.pow((grid.dim() - 1 - axis) as u32);
    spec.iter()
        .enumerate()
        .map(|(k, &c)| {
            let i = (k / stride) % n;
            c * Complex64::new(0.0, grid.deriv_freq(i))
        })
        .collect()
}

/// Spectral gradient: component `j` has coefficients `i xi_j f^`.
pub fn spectral_grad(f: &ScalarField) -> Result<VectorField> {
    let grid = f.grid();
    let spectra: Vec<Vec<Complex64>> = (0..grid.dim())
        .map(|a| derivative_spectrum(grid, f.spectrum(), a))
        .collect();
    let refs: Vec<&[Complex64]> = spectra.iter().map(|s| s.as_slice()).collect();
    let samples = grid.inverse_real_many(&refs);
    let comps = samples
        .into_iter()
        .zip(spectra)
        .map(|(s, c)| ScalarField::from_parts(grid, s, c))
        .collect::<Result<Vec<_>>>()?;
    VectorField::new(comps)
}

/// Spectral divergence of a vector field.
pub fn spectral_div(v: &VectorField) -> Result<ScalarField> {
    let grid = v.grid();
    let mut acc = vec![Complex64::new(0.0, 0.0); grid.len()];
    for (a, c) in v.components().iter().enumerate() {
        for (o, d) in acc.iter_mut().zip(derivative_spectrum(grid, c.spectrum(), a)) {
            *o += d;
        }
    }
    ScalarField::from_spectrum(grid, acc)
}

/// Spectral Laplacian, multiplier `-|xi|^2`.
pub fn spectral_laplacian(f: &ScalarField) -> Result<ScalarField> {
    let grid = f.grid();
    let spec = f
        .spectrum()
        .iter()
        .zip(grid.xi_sq())
        .map(|(&c, &x2)| -c * x2)
        .collect();
    ScalarField::from_spectrum(grid, spec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn unit_box(n: usize) -> Grid {
        Grid::new(1, n, 2.0 * PI).unwrap()
    }

    fn max_diff(a: &ScalarField, b: &ScalarField) -> f64 {
        a.samples()
            .iter()
            .zip(b.samples())
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max)
    }

    #[test]
    fn lambda_on_unit_mode() {
        let g = unit_box(32);
        let f = ScalarField::from_fn(&g, |p| p[0].cos()).unwrap();
        assert!(max_diff(&frac_lambda(&f, 2.0).unwrap(), &f) < 1e-13);
    }

    #[test]
    fn lambda_multiplier_on_second_mode() {
        let g = unit_box(32);
        let f = ScalarField::from_fn(&g, |p| (2.0 * p[0]).cos()).unwrap();
        let want = f.scale(2.0).unwrap();
        assert!(max_diff(&frac_lambda(&f, 1.0).unwrap(), &want) < 1e-13);
    }

    #[test]
    fn negative_order_needs_zero_mean() {
        let g = unit_box(16);
        let f = ScalarField::from_fn(&g, |p| 1.0 + p[0].cos()).unwrap();
        assert!(matches!(frac_lambda(&f, -0.5), Err(Error::NonZeroMean(_))));
        assert!(frac_lambda(&f, 0.5).is_ok());
    }

    #[test]
    fn positive_order_kills_mean() {
        let g = unit_box(16);
        let f = ScalarField::constant(&g, 3.0).unwrap();
        assert!(frac_lambda(&f, 0.3).unwrap().max_abs() < 1e-15);
    }

    #[test]
    fn norm_of_cosine() {
        let g = unit_box(64);
        let f = ScalarField::from_fn(&g, |p| p[0].cos()).unwrap();
        for sigma in [0.0, 0.5, 1.0, 2.7] {
            let n = sobolev_norm(&f, NormSpec::homogeneous(sigma).unwrap()).unwrap();
            assert!((n - PI.sqrt()).abs() < 1e-12, "sigma {sigma}: {n}");
        }
        assert_eq!(sobolev_norm(&ScalarField::zeros(&g), NormSpec::homogeneous(1.0).unwrap()).unwrap(), 0.0);
    }

    #[test]
    fn two_mode_norm() {
        // Direct Parseval: each cos(kx) carries pi, weighted by k^{2 sigma}.
        let g = unit_box(64);
        let f = ScalarField::from_fn(&g, |p| p[0].cos() + (3.0 * p[0]).cos()).unwrap();
        let want = (PI * (1.0 + 3f64.powi(3))).sqrt();
        let got = sobolev_norm(&f, NormSpec::homogeneous(1.5).unwrap()).unwrap();
        assert!((got - want).abs() < 1e-12 * want);
    }

    #[test]
    fn inhomogeneous_combines_l2() {
        let g = unit_box(64);
        let f = ScalarField::from_fn(&g, |p| 0.5 + (2.0 * p[0]).sin()).unwrap();
        let l2 = sobolev_norm(&f, NormSpec::homogeneous(0.0).unwrap()).unwrap();
        let h = sobolev_norm(&f, NormSpec::homogeneous(1.0).unwrap()).unwrap();
        let full = sobolev_norm(&f, NormSpec::inhomogeneous(1.0).unwrap()).unwrap();
        assert!((full - (l2 * l2 + h * h).sqrt()).abs() < 1e-13);
        assert_eq!(
            sobolev_norm(&f, NormSpec::inhomogeneous(0.0).unwrap()).unwrap(),
            l2
        );
        assert!(NormSpec::homogeneous(-1.0).is_err());
        assert!(NormSpec::homogeneous(f64::NAN).is_err());
    }

    #[test]
    fn friedrichs_selects_modes() {
        let g = unit_box(32);
        let f = ScalarField::from_fn(&g, |p| p[0].cos() + (5.0 * p[0]).cos()).unwrap();
        let want = ScalarField::from_fn(&g, |p| p[0].cos()).unwrap();
        assert!(max_diff(&friedrichs_project(&f, 2.0).unwrap(), &want) < 1e-13);
        let same = friedrichs_project(&f, 100.0).unwrap();
        assert_eq!(same.samples(), f.samples());
        assert!(friedrichs_project(&f, 0.0).is_err());
    }

    #[test]
    fn gradient_of_sine_and_constant() {
        let g = unit_box(32);
        let f = ScalarField::from_fn(&g, |p| p[0].sin()).unwrap();
        let want = ScalarField::from_fn(&g, |p| p[0].cos()).unwrap();
        assert!(max_diff(spectral_grad(&f).unwrap().component(0), &want) < 1e-13);
        let c = ScalarField::constant(&g, 2.0).unwrap();
        assert!(spectral_grad(&c).unwrap().max_magnitude() < 1e-15);

        let g2 = Grid::new(2, 16, 2.0 * PI).unwrap();
        let f2 = ScalarField::from_fn(&g2, |p| p[0].sin()).unwrap();
        let grad = spectral_grad(&f2).unwrap();
        assert_eq!(grad.len(), 2);
        assert!(grad.component(1).max_abs() < 1e-13);
    }

    #[test]
    fn nyquist_dropped_by_derivative() {
        let g = unit_box(8);
        // cos(4x) sits exactly on the Nyquist index.
        let f = ScalarField::from_fn(&g, |p| (4.0 * p[0]).cos()).unwrap();
        assert!(spectral_grad(&f).unwrap().max_magnitude() < 1e-14);
    }
}

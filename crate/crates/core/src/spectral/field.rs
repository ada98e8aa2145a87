use std::sync::OnceLock;

use num_complex::Complex64;

use super::grid::{Grid, Point};
use crate::error::{Error, Result};

/// Real scalar samples on a [`Grid`], with a lazily cached spectrum.
///
/// Fields are immutable snapshots; every constructor rejects non-finite samples.
#[derive(Clone, Debug)]
pub struct ScalarField {
    grid: Grid,
    samples: Vec<f64>,
    spectrum: OnceLock<Vec<Complex64>>,
}

impl ScalarField {
    pub fn from_samples(grid: &Grid, samples: Vec<f64>) -> Result<Self> {
        if samples.len() != grid.len() {
            return Err(Error::GridMismatch);
        }
        if samples.iter().any(|x| !x.is_finite()) {
            return Err(Error::FieldNotFinite);
        }
        Ok(Self {
            grid: grid.clone(),
            samples,
            spectrum: OnceLock::new(),
        })
    }

    pub fn from_fn(grid: &Grid, f: impl Fn(&Point) -> f64) -> Result<Self> {
        let samples = grid.points().map(|p| f(&p)).collect();
        Self::from_samples(grid, samples)
    }

    pub fn zeros(grid: &Grid) -> Self {
        Self {
            grid: grid.clone(),
            samples: vec![0.0; grid.len()],
            spectrum: OnceLock::new(),
        }
    }

    pub fn constant(grid: &Grid, value: f64) -> Result<Self> {
        Self::from_samples(grid, vec![value; grid.len()])
    }

    /// Builds the field from spectral coefficients, which are kept as the cache.
    ///
    /// The spectrum is symmetrized so the samples are exactly real.
    pub fn from_spectrum(grid: &Grid, mut spectrum: Vec<Complex64>) -> Result<Self> {
        if spectrum.len() != grid.len() {
            return Err(Error::GridMismatch);
        }
        grid.symmetrize(&mut spectrum);
        let samples = grid.inverse_real_many(&[&spectrum]).pop().unwrap();
        Self::from_parts(grid, samples, spectrum)
    }

    /// Pairs samples with an already-known spectrum. Caller guarantees consistency.
    pub(crate) fn from_parts(grid: &Grid, samples: Vec<f64>, spectrum: Vec<Complex64>) -> Result<Self> {
        let field = Self::from_samples(grid, samples)?;
        if spectrum.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::FieldNotFinite);
        }
        let _ = field.spectrum.set(spectrum);
        Ok(field)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    /// Spectral coefficients (forward transform with `1/N^d`).
    pub fn spectrum(&self) -> &[Complex64] {
        self.spectrum.get_or_init(|| {
            self.grid.forward_real_many(&[&self.samples]).pop().unwrap()
        })
    }

    pub fn has_cached_spectrum(&self) -> bool {
        self.spectrum.get().is_some()
    }

    pub fn max(&self) -> f64 {
        self.samples.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.samples.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_abs(&self) -> f64 {
        self.samples.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    /// Box quadrature of the samples.
    pub fn integral(&self) -> f64 {
        self.samples.iter().sum::<f64>() * self.grid.cell_volume()
    }

    /// `L^2` inner product by box quadrature.
    pub fn inner(&self, other: &ScalarField) -> Result<f64> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        let s: f64 = self.samples.iter().zip(&other.samples).map(|(a, b)| a * b).sum();
        Ok(s * self.grid.cell_volume())
    }

    /// Physical-space `L^2` norm by box quadrature.
    pub fn l2_norm(&self) -> f64 {
        (self.samples.iter().map(|x| x * x).sum::<f64>() * self.grid.cell_volume()).sqrt()
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::from_samples(&self.grid, self.samples.iter().map(|&x| f(x)).collect())
    }

    pub fn zip_map(&self, other: &ScalarField, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        let s = self.samples.iter().zip(&other.samples).map(|(&a, &b)| f(a, b)).collect();
        Self::from_samples(&self.grid, s)
    }

    pub fn scale(&self, c: f64) -> Result<Self> {
        self.map(|x| c * x)
    }

    pub fn add(&self, other: &ScalarField) -> Result<Self> {
        self.zip_map(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &ScalarField) -> Result<Self> {
        self.zip_map(other, |a, b| a - b)
    }

    pub fn mul(&self, other: &ScalarField) -> Result<Self> {
        self.zip_map(other, |a, b| a * b)
    }
}

/// `d` scalar components on a common grid.
#[derive(Clone, Debug)]
pub struct VectorField {
    components: Vec<ScalarField>,
}

impl VectorField {
    pub fn new(components: Vec<ScalarField>) -> Result<Self> {
        let Some(first) = components.first() else {
            return Err(Error::Dimension("vector field needs at least one component".into()));
        };
        if components.iter().any(|c| c.grid() != first.grid()) {
            return Err(Error::GridMismatch);
        }
        Ok(Self { components })
    }

    pub fn zeros(grid: &Grid) -> Self {
        Self {
            components: (0..grid.dim()).map(|_| ScalarField::zeros(grid)).collect(),
        }
    }

    pub fn from_fn(grid: &Grid, f: impl Fn(&Point) -> Point) -> Result<Self> {
        let values: Vec<Point> = grid.points().map(|p| f(&p)).collect();
        let components = (0..grid.dim())
            .map(|j| ScalarField::from_samples(grid, values.iter().map(|v| v[j]).collect()))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { components })
    }

    pub fn grid(&self) -> &Grid {
        self.components[0].grid()
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn component(&self, j: usize) -> &ScalarField {
        &self.components[j]
    }

    pub fn components(&self) -> &[ScalarField] {
        &self.components
    }

    pub fn into_components(self) -> Vec<ScalarField> {
        self.components
    }

    /// Pointwise Euclidean magnitude, max over the grid.
    pub fn max_magnitude(&self) -> f64 {
        let n = self.grid().len();
        (0..n)
            .map(|i| {
                self.components
                    .iter()
                    .map(|c| c.samples()[i] * c.samples()[i])
                    .sum::<f64>()
                    .sqrt()
            })
            .fold(0.0, f64::max)
    }

    pub fn l2_norm(&self) -> f64 {
        self.components.iter().map(|c| c.l2_norm().powi(2)).sum::<f64>().sqrt()
    }
}

/// Anything whose norm is the root-sum-square over scalar components.
pub trait Components {
    fn scalar_components(&self) -> Vec<&ScalarField>;
}

impl Components for ScalarField {
    fn scalar_components(&self) -> Vec<&ScalarField> {
        vec![self]
    }
}

impl Components for VectorField {
    fn scalar_components(&self) -> Vec<&ScalarField> {
        self.components.iter().collect()
    }
}

impl Components for [ScalarField] {
    fn scalar_components(&self) -> Vec<&ScalarField> {
        self.iter().collect()
    }
}

impl Components for Vec<ScalarField> {
    fn scalar_components(&self) -> Vec<&ScalarField> {
        self.iter().collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_finite() {
        let g = Grid::new(1, 8, 1.0).unwrap();
        let mut s = vec![0.0; 8];
        s[3] = f64::NAN;
        assert_eq!(ScalarField::from_samples(&g, s).unwrap_err(), Error::FieldNotFinite);
        assert!(ScalarField::from_samples(&g, vec![0.0; 7]).is_err());
    }

    #[test]
    fn spectrum_cache_matches_transform() {
        let g = Grid::new(2, 16, 2.0).unwrap();
        let f = ScalarField::from_fn(&g, |p| (3.0 * p[0]).sin() * (p[1] * 2.0).cos() + 0.2).unwrap();
        let spec = f.spectrum().to_vec();
        let rebuilt = ScalarField::from_spectrum(&g, spec).unwrap();
        let err = rebuilt
            .samples()
            .iter()
            .zip(f.samples())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-12 * f.max_abs());
    }
}

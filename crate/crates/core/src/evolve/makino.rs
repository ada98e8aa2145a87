use crate::coupling::{pow_clamped, PhysParams};
use crate::error::{Error, Result};
use crate::spectral::ScalarField;

/// Physical densities above `-NEGATIVE_FLOOR` are read as zero by the forward map.
pub const NEGATIVE_FLOOR: f64 = 1e-12;

/// `2 sqrt(A gamma) / (gamma - 1)`.
pub fn makino_prefactor(params: &PhysParams) -> f64 {
    2.0 * (params.pressure_const * params.gamma).sqrt() / (params.gamma - 1.0)
}

/// `rho = 2 sqrt(A gamma)/(gamma-1) * varrho^{(gamma-1)/2}`.
pub fn makino_transform(varrho: &ScalarField, params: &PhysParams) -> Result<ScalarField> {
    params.validate()?;
    let min = varrho.min();
    if min < -NEGATIVE_FLOOR {
        return Err(Error::NegativeDensity(min));
    }
    let c = makino_prefactor(params);
    let e = 0.5 * (params.gamma - 1.0);
    varrho.map(|r| c * pow_clamped(r, e))
}

/// Inverse of [`makino_transform`]; negative `rho` is clamped to vacuum.
pub fn makino_inverse(rho: &ScalarField, params: &PhysParams) -> Result<ScalarField> {
    params.validate()?;
    let c = makino_prefactor(params);
    let e = 2.0 / (params.gamma - 1.0);
    rho.map(|r| pow_clamped(r / c, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::Grid;

    #[test]
    fn identity_parameters() {
        let p = PhysParams::new(3.0, 1.0 / 3.0, 0.0, 0.0, 1.0).unwrap();
        assert!((makino_prefactor(&p) - 1.0).abs() < 1e-15);
        let g = Grid::new(1, 16, 4.0).unwrap();
        let f = ScalarField::from_fn(&g, |x| 1.0 + x[0] * x[0]).unwrap();
        let r = makino_transform(&f, &p).unwrap();
        for (a, b) in r.samples().iter().zip(f.samples()) {
            assert!((a - b).abs() < 1e-14);
        }
        assert_eq!(makino_transform(&ScalarField::zeros(&g), &p).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn rejects_negative_density() {
        let p = PhysParams::euler(2.0).unwrap();
        let g = Grid::new(1, 8, 1.0).unwrap();
        let f = ScalarField::constant(&g, -1e-6).unwrap();
        assert!(matches!(makino_transform(&f, &p), Err(Error::NegativeDensity(_))));
        let tiny = ScalarField::constant(&g, -1e-13).unwrap();
        assert_eq!(makino_transform(&tiny, &p).unwrap().max_abs(), 0.0);
        let back = makino_inverse(&ScalarField::constant(&g, -0.3).unwrap(), &p).unwrap();
        assert_eq!(back.max_abs(), 0.0);
    }
}

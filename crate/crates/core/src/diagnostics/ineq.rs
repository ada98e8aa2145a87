//! Ratios `LHS / RHS` for the commutator and composition inequalities, with seeded
//! ensembles of random band-limited fields.

use num_complex::Complex64;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{frac_lambda, homogeneous_seminorm, spectral_grad, Grid, ScalarField};

/// Zero-padding factor used to evaluate sup norms between grid points.
pub const SUP_REFINE: usize = 4;
/// Spectral content above half the dealiasing radius allowed in inputs (relative).
const BAND_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum IneqKind {
    /// `|[v, L^s] u| <~ |v|_{H^s} |u|_inf + |grad v|_inf |u|_{H^{s-1}}`.
    Com1 { s: f64 },
    /// `|[v, L^s] u - s grad v . L^{s-2} grad u| <~ |v|_{H^s} |u|_inf + |D^2 v|_inf |u|_{H^{s-2}}`.
    Com2 { s: f64 },
    /// `| |z|^alpha |_{H^sigma} <~ |z|_inf^{alpha-1} |z|_{H^sigma}`.
    Compo { sigma: f64, alpha: f64 },
}

impl IneqKind {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            IneqKind::Com1 { s } => s > 0.0 && s.is_finite(),
            IneqKind::Com2 { s } => s > 1.0 && s.is_finite(),
            IneqKind::Compo { sigma, alpha } => {
                alpha >= 1.0 && alpha.is_finite() && sigma >= 0.0 && sigma < alpha + 0.5
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Domain(format!("{self:?} outside the admissible parameter range")))
        }
    }
}

/// Left- and right-hand sides of one inequality evaluation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct IneqSides {
    pub lhs: f64,
    pub rhs: f64,
}

impl IneqSides {
    pub fn ratio(&self) -> f64 {
        if self.rhs == 0.0 {
            if self.lhs == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            self.lhs / self.rhs
        }
    }
}

fn check_band(f: &ScalarField) -> Result<()> {
    let grid = f.grid();
    let r2 = (0.5 * grid.dealias_radius()).powi(2);
    let spec = f.spectrum();
    let total: f64 = spec.iter().map(|z| z.norm_sqr()).sum();
    let high: f64 = spec
        .iter()
        .zip(grid.xi_sq())
        .filter(|(_, &x2)| x2 >= r2)
        .map(|(z, _)| z.norm_sqr())
        .sum();
    if high > BAND_TOL * BAND_TOL * total {
        return Err(Error::Domain("input not band-limited below half the dealiasing radius".into()));
    }
    Ok(())
}

fn signed(i: usize, n: usize) -> i64 {
    if i <= n / 2 {
        i as i64
    } else {
        i as i64 - n as i64
    }
}

/// Trigonometric interpolation of `f` onto a grid `factor` times finer.
pub fn refine(f: &ScalarField, factor: usize) -> Result<ScalarField> {
    let coarse = f.grid();
    if factor == 1 {
        return Ok(f.clone());
    }
    let n = coarse.n();
    let fine = Grid::new(coarse.dim(), n * factor, coarse.length())?;
    let m = fine.n();
    let d = coarse.dim();
    let mut spec = vec![Complex64::new(0.0, 0.0); fine.len()];
    for (k, &c) in f.spectrum().iter().enumerate() {
        if c == Complex64::new(0.0, 0.0) {
            continue;
        }
        let idx = coarse.multi_index(k);
        // Nyquist entries are split between +N/2 and -N/2 to keep the result real.
        let mut targets: Vec<(usize, f64)> = vec![(0, 1.0)];
        for a in 0..d {
            let s = signed(idx[a], n);
            let mut next = Vec::with_capacity(targets.len() * 2);
            for &(base, w) in &targets {
                if idx[a] == n / 2 {
                    for s2 in [s, -s] {
                        next.push((base * m + s2.rem_euclid(m as i64) as usize, 0.5 * w));
                    }
                } else {
                    next.push((base * m + s.rem_euclid(m as i64) as usize, w));
                }
            }
            targets = next;
        }
        for (t, w) in targets {
            spec[t] += c * w;
        }
    }
    ScalarField::from_spectrum(&fine, spec)
}

/// Sup norm estimated on the `SUP_REFINE`-times refined interpolant.
pub fn sup_norm(f: &ScalarField) -> Result<f64> {
    Ok(refine(f, SUP_REFINE)?.max_abs())
}

/// `[v, L^s] u = v L^s u - L^s (v u)`.
pub fn commutator(v: &ScalarField, u: &ScalarField, s: f64) -> Result<ScalarField> {
    let a = v.mul(&frac_lambda(u, s)?)?;
    let b = frac_lambda(&v.mul(u)?, s)?;
    a.sub(&b)
}

/// `s grad v . L^{s-2} grad u`.
pub fn com2_correction(v: &ScalarField, u: &ScalarField, s: f64) -> Result<ScalarField> {
    let gv = spectral_grad(v)?;
    let gu = spectral_grad(u)?;
    let mut acc = ScalarField::zeros(v.grid());
    for (a, b) in gv.components().iter().zip(gu.components()) {
        acc = acc.add(&a.mul(&frac_lambda(b, s - 2.0)?)?)?;
    }
    acc.scale(s)
}

fn max_gradient(v: &ScalarField) -> Result<f64> {
    let g = spectral_grad(v)?;
    let comps = g
        .components()
        .iter()
        .map(|c| refine(c, SUP_REFINE))
        .collect::<Result<Vec<_>>>()?;
    let n = comps[0].grid().len();
    Ok((0..n)
        .map(|p| comps.iter().map(|c| c.samples()[p].powi(2)).sum::<f64>().sqrt())
        .fold(0.0, f64::max))
}

fn max_hessian(v: &ScalarField) -> Result<f64> {
    let g = spectral_grad(v)?;
    let mut entries = Vec::new();
    for c in g.components() {
        for h in spectral_grad(c)?.components() {
            entries.push(refine(h, SUP_REFINE)?);
        }
    }
    let n = entries[0].grid().len();
    Ok((0..n)
        .map(|p| entries.iter().map(|c| c.samples()[p].powi(2)).sum::<f64>().sqrt())
        .fold(0.0, f64::max))
}

/// Sides of the first commutator estimate.
pub fn com1_sides(v: &ScalarField, u: &ScalarField, s: f64) -> Result<IneqSides> {
    IneqKind::Com1 { s }.validate()?;
    check_band(v)?;
    check_band(u)?;
    let lhs = commutator(v, u, s)?.l2_norm();
    let rhs = homogeneous_seminorm(v, s)? * sup_norm(u)? + max_gradient(v)? * homogeneous_seminorm(u, s - 1.0)?;
    Ok(IneqSides { lhs, rhs })
}

/// Sides of the second commutator estimate; `corrected = false` drops the
/// `s grad v . L^{s-2} grad u` term from the left side.
pub fn com2_sides(v: &ScalarField, u: &ScalarField, s: f64, corrected: bool) -> Result<IneqSides> {
    IneqKind::Com2 { s }.validate()?;
    check_band(v)?;
    check_band(u)?;
    let mut l = commutator(v, u, s)?;
    if corrected {
        l = l.sub(&com2_correction(v, u, s)?)?;
    }
    let rhs = homogeneous_seminorm(v, s)? * sup_norm(u)? + max_hessian(v)? * homogeneous_seminorm(u, s - 2.0)?;
    Ok(IneqSides { lhs: l.l2_norm(), rhs })
}

/// Sides of the composition estimate.
pub fn compo_sides(z: &ScalarField, sigma: f64, alpha: f64) -> Result<IneqSides> {
    IneqKind::Compo { sigma, alpha }.validate()?;
    check_band(z)?;
    let za = z.map(|x| x.abs().powf(alpha))?;
    let lhs = homogeneous_seminorm(&za, sigma)?;
    let rhs = sup_norm(z)?.powf(alpha - 1.0) * homogeneous_seminorm(z, sigma)?;
    Ok(IneqSides { lhs, rhs })
}

/// `LHS/RHS` for one evaluation. `v` is ignored for the composition estimate.
pub fn ineq_ratio(kind: IneqKind, v: &ScalarField, u: &ScalarField) -> Result<f64> {
    let sides = match kind {
        IneqKind::Com1 { s } => com1_sides(v, u, s)?,
        IneqKind::Com2 { s } => com2_sides(v, u, s, true)?,
        IneqKind::Compo { sigma, alpha } => compo_sides(u, sigma, alpha)?,
    };
    Ok(sides.ratio())
}

/// Seed of ensemble member `index`, derived from `root` by a keyed stream.
pub fn derive_seed(root: u64, index: u64) -> u64 {
    let mut rng = ChaCha20Rng::seed_from_u64(root);
    rng.set_stream(index);
    rng.next_u64()
}

/// Random real field with integer wavevectors `0 < |k|_inf <= modes` and coefficients
/// uniform in the unit square, decaying like `(1 + |k|)^{-decay}`.
pub fn random_band_limited(grid: &Grid, modes: usize, decay: f64, seed: u64) -> Result<ScalarField> {
    let n = grid.n();
    if modes == 0 || modes >= n / 2 {
        return Err(Error::Domain(format!("mode count {modes} must lie in 1..N/2")));
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut spec = vec![Complex64::new(0.0, 0.0); grid.len()];
    // Iterate flat indices in order so the field depends on the seed only, not on N.
    let d = grid.dim();
    let side = 2 * modes + 1;
    let total = side.pow(d as u32);
    for q in 0..total {
        let mut ks = [0i64; 3];
        let mut r = q;
        for a in (0..d).rev() {
            ks[a] = (r % side) as i64 - modes as i64;
            r /= side;
        }
        let re: f64 = rng.random_range(-1.0..1.0);
        let im: f64 = rng.random_range(-1.0..1.0);
        if ks[..d].iter().all(|&k| k == 0) {
            continue;
        }
        let kn = ks[..d].iter().map(|&k| (k * k) as f64).sum::<f64>().sqrt();
        let amp = (1.0 + kn).powf(-decay);
        let mut flat = 0usize;
        for &k in &ks[..d] {
            flat = flat * n + k.rem_euclid(n as i64) as usize;
        }
        spec[flat] += Complex64::new(re, im) * amp;
    }
    ScalarField::from_spectrum(grid, spec)
}

/// Summary of an ensemble of ratios.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EnsembleStats {
    pub members: usize,
    pub max: f64,
    pub mean: f64,
    pub min: f64,
    pub argmax: usize,
}

impl EnsembleStats {
    pub fn from_ratios(r: &[f64]) -> Self {
        let (argmax, max) = r
            .iter()
            .copied()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |a, (i, x)| if x > a.1 { (i, x) } else { a });
        Self {
            members: r.len(),
            max,
            mean: r.iter().sum::<f64>() / r.len() as f64,
            min: r.iter().copied().fold(f64::INFINITY, f64::min),
            argmax,
        }
    }
}

/// Ensemble definition: `members` random pairs with `modes` active wavenumbers per axis.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleSpec {
    pub kind: IneqKind,
    pub members: usize,
    pub modes: usize,
    #[serde(default = "default_decay")]
    pub decay: f64,
    pub root_seed: u64,
}

fn default_decay() -> f64 {
    1.0
}

/// Ratio for member `i` of the ensemble.
pub fn ensemble_member(grid: &Grid, spec: &EnsembleSpec, i: usize) -> Result<f64> {
    spec.kind.validate()?;
    let seed = derive_seed(spec.root_seed, i as u64);
    let v = random_band_limited(grid, spec.modes, spec.decay, seed)?;
    let u = random_band_limited(grid, spec.modes, spec.decay, seed ^ 0x9e37_79b9_7f4a_7c15)?;
    ineq_ratio(spec.kind, &v, &u)
}

/// Sequential ensemble; members are independent, so callers may fan out with
/// [`ensemble_member`] and combine with [`EnsembleStats::from_ratios`].
pub fn ensemble_max_ratio(grid: &Grid, spec: &EnsembleSpec) -> Result<EnsembleStats> {
    if spec.members == 0 {
        return Err(Error::Domain("empty ensemble".into()));
    }
    let r = (0..spec.members)
        .map(|i| ensemble_member(grid, spec, i))
        .collect::<Result<Vec<_>>>()?;
    Ok(EnsembleStats::from_ratios(&r))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn grid(n: usize) -> Grid {
        Grid::new(1, n, 2.0 * PI).unwrap()
    }

    #[test]
    fn constants_commute() {
        let g = grid(64);
        let v = ScalarField::constant(&g, 2.5).unwrap();
        let u = random_band_limited(&g, 6, 1.0, 7).unwrap();
        assert!(com1_sides(&v, &u, 1.5).unwrap().lhs < 1e-13);
    }

    #[test]
    fn refinement_interpolates() {
        let g = grid(32);
        let f = ScalarField::from_fn(&g, |p| (3.0 * p[0]).sin() + 0.5 * (5.0 * p[0]).cos()).unwrap();
        let r = refine(&f, 4).unwrap();
        for (i, p) in r.grid().points().enumerate() {
            let want = (3.0 * p[0]).sin() + 0.5 * (5.0 * p[0]).cos();
            assert!((r.samples()[i] - want).abs() < 1e-13);
        }
    }

    #[test]
    fn random_fields_are_resolution_independent() {
        let a = random_band_limited(&grid(64), 8, 1.0, 42).unwrap();
        let b = random_band_limited(&grid(128), 8, 1.0, 42).unwrap();
        let rb = refine(&a, 2).unwrap();
        let err = rb.samples().iter().zip(b.samples()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        assert!(err < 1e-13);
    }

    #[test]
    fn band_limit_enforced() {
        let g = grid(32);
        let f = ScalarField::from_fn(&g, |p| (10.0 * p[0]).cos()).unwrap();
        assert!(compo_sides(&f, 0.5, 2.0).is_err());
    }

    #[test]
    fn parameter_ranges() {
        assert!(IneqKind::Com1 { s: 0.0 }.validate().is_err());
        assert!(IneqKind::Com2 { s: 1.0 }.validate().is_err());
        assert!(IneqKind::Compo { sigma: 2.5, alpha: 2.0 }.validate().is_err());
        assert!(IneqKind::Compo { sigma: 0.5, alpha: 0.5 }.validate().is_err());
    }

    #[test]
    fn linear_commutator_identity() {
        // v = sin x, u = cos(8x): the commutator is dominated by the correction term.
        let g = grid(128);
        let v = ScalarField::from_fn(&g, |p| p[0].sin()).unwrap();
        let u = ScalarField::from_fn(&g, |p| (8.0 * p[0]).cos()).unwrap();
        let raw = com2_sides(&v, &u, 2.5, false).unwrap();
        let cor = com2_sides(&v, &u, 2.5, true).unwrap();
        assert!(raw.ratio() > 2.0 * cor.ratio());
    }
}

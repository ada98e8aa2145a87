//! Reference Burgers flow `v_t + v . grad v = 0` solved by characteristics.
//!
//! The initial velocity is split as `v0(x) = Lambda0 x + v~0(x)`; only the perturbation
//! `v~0` is ever sampled. Along characteristics `X(t, y) = y + t v0(y)` the gradient is
//! `Dv(t, X) = (I + t Dv0(y))^{-1} Dv0(y)`, and `K` is read off from
//! `Dv = I/(1+t) + K/(1+t)^2`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::spectral::{
    derivative_spectrum, homogeneous_seminorm, Grid, Point, ScalarField, VectorField,
};

pub const NEWTON_TOL: f64 = 1e-12;
pub const NEWTON_MAX_ITER: usize = 50;
/// Allowed mismatch between `Dv` and its `K` decomposition.
pub const DV_IDENTITY_TOL: f64 = 1e-9;

/// `exp(1 - 1/(1 - s))` for `s = r^2 < 1`, zero outside; with `d/ds` and `d^2/ds^2`.
fn bump_s(s: f64) -> (f64, f64, f64) {
    if s >= 1.0 {
        return (0.0, 0.0, 0.0);
    }
    let q = 1.0 - s;
    let b = (1.0 - 1.0 / q).exp();
    let q2 = q * q;
    let db = -b / q2;
    let d2b = b * (2.0 * s - 1.0) / (q2 * q2);
    (b, db, d2b)
}

/// Smooth compactly supported profile `exp(1 - 1/(1 - r^2))` on `r < 1`.
pub fn bump(r: f64) -> f64 {
    bump_s(r * r).0
}

/// `bump(|x - center| / radius)` and its gradient in `x`.
pub fn bump_with_gradient(x: &Point, center: &Point, radius: f64, dim: usize) -> (f64, Point) {
    let term = BumpTerm {
        amplitude: 1.0,
        center: *center,
        radius,
        direction: [0.0; 3],
    };
    let (b, g, _) = term.profile(x, dim);
    (b, g)
}

/// One perturbation term `amplitude * bump(|x - center| / radius) * direction`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BumpTerm {
    pub amplitude: f64,
    #[serde(default)]
    pub center: Point,
    pub radius: f64,
    pub direction: Point,
}

impl BumpTerm {
    /// Returns `(b, grad b, hess b)` of the scalar profile at `x`.
    fn profile(&self, x: &Point, dim: usize) -> (f64, [f64; 3], [[f64; 3]; 3]) {
        let r2 = self.radius * self.radius;
        let mut dx = [0.0; 3];
        let mut s = 0.0;
        for a in 0..dim {
            dx[a] = x[a] - self.center[a];
            s += dx[a] * dx[a];
        }
        s /= r2;
        let (b, db, d2b) = bump_s(s);
        let mut grad = [0.0; 3];
        let mut hess = [[0.0; 3]; 3];
        if b == 0.0 {
            return (0.0, grad, hess);
        }
        let mut ds = [0.0; 3];
        for a in 0..dim {
            ds[a] = 2.0 * dx[a] / r2;
            grad[a] = db * ds[a];
        }
        for a in 0..dim {
            for c in 0..dim {
                hess[a][c] = d2b * ds[a] * ds[c] + if a == c { 2.0 * db / r2 } else { 0.0 };
            }
        }
        (b, grad, hess)
    }
}

/// Band-limited perturbation given by samples; evaluated off-grid by its Fourier series.
#[derive(Clone, Debug)]
pub struct SampledPerturbation {
    grid: Grid,
    spectra: Vec<Vec<Complex64>>,
    /// `(flat index, phase frequency, derivative frequency)` of every nonzero mode.
    modes: Vec<(usize, [f64; 3], [f64; 3])>,
}

impl SampledPerturbation {
    pub fn new(field: &VectorField) -> Result<Self> {
        let grid = field.grid().clone();
        let spectra: Vec<Vec<Complex64>> =
            field.components().iter().map(|c| c.spectrum().to_vec()).collect();
        let modes = (0..grid.len())
            .filter(|&k| spectra.iter().any(|s| s[k].norm() > 0.0))
            .map(|k| {
                let idx = grid.multi_index(k);
                let mut xi = [0.0; 3];
                for a in 0..grid.dim() {
                    xi[a] = grid.freq(idx[a]);
                }
                (k, xi, grid.deriv_wavevector(k))
            })
            .collect();
        Ok(Self { grid, spectra, modes })
    }

    /// Values and first derivatives at an arbitrary point.
    fn eval(&self, y: &Point) -> ([f64; 3], Mat) {
        let dim = self.grid.dim();
        let half = 0.5 * self.grid.length();
        let mut v = [0.0; 3];
        let mut dv = Mat::zeros(dim);
        for &(k, xi, xd) in &self.modes {
            let mut phase = 0.0;
            for a in 0..dim {
                phase += xi[a] * (y[a] + half);
            }
            let e = Complex64::from_polar(1.0, phase);
            for (j, spec) in self.spectra.iter().enumerate() {
                let term = spec[k] * e;
                v[j] += term.re;
                for a in 0..dim {
                    // d/dy_a of Re(c e^{i xi.y}) = Re(i xi_a c e^{i xi.y})
                    dv.set(j, a, dv.get(j, a) - xd[a] * term.im);
                }
            }
        }
        (v, dv)
    }
}

#[derive(Clone, Debug)]
pub enum Perturbation {
    Zero,
    Bumps(Vec<BumpTerm>),
    Sampled(SampledPerturbation),
}

/// Reference initial velocity `v0 = Lambda0 x + v~0` together with its (H0) margin.
#[derive(Clone, Debug)]
pub struct BurgersRef {
    dim: usize,
    linear: Mat,
    perturbation: Perturbation,
    epsilon: Option<f64>,
}

impl BurgersRef {
    pub fn new(linear: Mat, perturbation: Perturbation) -> Result<Self> {
        let dim = linear.dim();
        if let Perturbation::Sampled(s) = &perturbation {
            if s.grid.dim() != dim || s.spectra.len() != dim {
                return Err(Error::Dimension("sampled perturbation dimension mismatch".into()));
            }
        }
        if let Perturbation::Bumps(terms) = &perturbation {
            if terms.iter().any(|t| !(t.radius > 0.0) || !t.amplitude.is_finite()) {
                return Err(Error::InvalidParams("bump radius must be positive".into()));
            }
        }
        Ok(Self {
            dim,
            linear,
            perturbation,
            epsilon: None,
        })
    }

    /// `v0(x) = x`.
    pub fn identity(dim: usize) -> Self {
        Self::new(Mat::identity(dim), Perturbation::Zero).expect("identity reference")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn linear_part(&self) -> &Mat {
        &self.linear
    }

    pub fn perturbation(&self) -> &Perturbation {
        &self.perturbation
    }

    pub fn is_linear(&self) -> bool {
        matches!(self.perturbation, Perturbation::Zero)
    }

    /// (H0) margin recorded by [`BurgersRef::with_checked_h0`].
    pub fn epsilon(&self) -> Option<f64> {
        self.epsilon
    }

    /// Runs [`check_h0`] and stores the margin.
    pub fn with_checked_h0(mut self, grid: &Grid) -> Result<Self> {
        self.epsilon = Some(check_h0(&self, grid)?);
        Ok(self)
    }

    pub fn v0(&self, y: &Point) -> Point {
        let mut v = self.linear.mul_vec(y);
        match &self.perturbation {
            Perturbation::Zero => {}
            Perturbation::Bumps(terms) => {
                for t in terms {
                    let (b, _, _) = t.profile(y, self.dim);
                    for j in 0..self.dim {
                        v[j] += t.amplitude * b * t.direction[j];
                    }
                }
            }
            Perturbation::Sampled(s) => {
                let (pv, _) = s.eval(y);
                for j in 0..self.dim {
                    v[j] += pv[j];
                }
            }
        }
        v
    }

    /// Jacobian `Dv0`, rows are components and columns derivatives.
    pub fn dv0(&self, y: &Point) -> Mat {
        let mut m = self.linear;
        match &self.perturbation {
            Perturbation::Zero => {}
            Perturbation::Bumps(terms) => {
                for t in terms {
                    let (_, g, _) = t.profile(y, self.dim);
                    for j in 0..self.dim {
                        for k in 0..self.dim {
                            m.set(j, k, m.get(j, k) + t.amplitude * t.direction[j] * g[k]);
                        }
                    }
                }
            }
            Perturbation::Sampled(s) => {
                let (_, d) = s.eval(y);
                m = m + d;
            }
        }
        m
    }

    /// Second derivatives `d_l Dv0` for analytic perturbations (`None` when sampled).
    pub fn d2v0(&self, y: &Point) -> Option<[Mat; 3]> {
        let mut out = [Mat::zeros(self.dim); 3];
        match &self.perturbation {
            Perturbation::Zero => Some(out),
            Perturbation::Bumps(terms) => {
                for t in terms {
                    let (_, _, h) = t.profile(y, self.dim);
                    for (l, m) in out.iter_mut().enumerate().take(self.dim) {
                        for j in 0..self.dim {
                            for k in 0..self.dim {
                                m.set(j, k, m.get(j, k) + t.amplitude * t.direction[j] * h[k][l]);
                            }
                        }
                    }
                }
                Some(out)
            }
            Perturbation::Sampled(_) => None,
        }
    }

    /// Forward characteristic map `X(t, y) = y + t v0(y)`.
    pub fn flow(&self, t: f64, y: &Point) -> Point {
        let v = self.v0(y);
        let mut x = [0.0; 3];
        for a in 0..self.dim {
            x[a] = y[a] + t * v[a];
        }
        x
    }
}

/// Distance from the spectrum of `a` to the closed negative real axis.
pub fn dist_spectrum_negreals(a: &Mat) -> Result<f64> {
    let ev = a.eigenvalues()?;
    Ok(ev
        .iter()
        .map(|z| if z.re >= 0.0 { z.norm() } else { z.im.abs() })
        .fold(f64::INFINITY, f64::min))
}

/// Minimum (H0) margin over the grid samples.
pub fn check_h0(reference: &BurgersRef, grid: &Grid) -> Result<f64> {
    if grid.dim() != reference.dim {
        return Err(Error::Dimension("grid and reference dimensions differ".into()));
    }
    let eps = if reference.is_linear() {
        dist_spectrum_negreals(&reference.linear)?
    } else {
        let mut eps = f64::INFINITY;
        for p in grid.points() {
            eps = eps.min(dist_spectrum_negreals(&reference.dv0(&p))?);
        }
        eps
    };
    if !(eps > 0.0) {
        return Err(Error::H0Violated(eps));
    }
    Ok(eps)
}

fn norm(v: &Point) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

fn residual(reference: &BurgersRef, t: f64, y: &Point, x: &Point) -> Point {
    let fy = reference.flow(t, y);
    let mut r = [0.0; 3];
    for a in 0..reference.dim {
        r[a] = fy[a] - x[a];
    }
    r
}

/// Solves `y + t v0(y) = x` by damped Newton from `y = (I + t Lambda0)^{-1} x`.
pub fn invert_flow(reference: &BurgersRef, t: f64, x: &Point) -> Result<Point> {
    let dim = reference.dim;
    let jac0 = Mat::identity(dim) + reference.linear.scale(t);
    let mut y = jac0
        .inverse()
        .ok_or(Error::NewtonDiverged { iterations: 0, residual: f64::INFINITY })?
        .mul_vec(x);
    if t == 0.0 {
        return Ok(*x);
    }
    // Accept at the absolute tolerance, or at the rounding floor of `y + t (Lambda0 y + v~0(y))`,
    // which grows with t even where x is small.
    let lin = reference.linear.frobenius();
    let tol = |y: &Point| {
        let scale = norm(x) + norm(y) * (1.0 + 2.0 * t * lin) + t * norm(&reference.v0(y)) + 1.0;
        NEWTON_TOL.max(16.0 * f64::EPSILON * scale)
    };
    let mut r = residual(reference, t, &y, x);
    let mut rn = norm(&r);
    for _ in 0..NEWTON_MAX_ITER {
        if rn <= tol(&y) {
            return Ok(y);
        }
        let jac = Mat::identity(dim) + reference.dv0(&y).scale(t);
        let inv = jac.inverse().ok_or(Error::NewtonDiverged {
            iterations: 0,
            residual: rn,
        })?;
        let step = inv.mul_vec(&r);
        let mut lambda = 1.0;
        let mut trial;
        let mut trial_r;
        let mut trial_n;
        loop {
            trial = y;
            for a in 0..dim {
                trial[a] -= lambda * step[a];
            }
            trial_r = residual(reference, t, &trial, x);
            trial_n = norm(&trial_r);
            if trial_n <= rn || lambda < 1e-4 {
                break;
            }
            lambda *= 0.5;
        }
        y = trial;
        r = trial_r;
        rn = trial_n;
    }
    if rn <= tol(&y) {
        return Ok(y);
    }
    Err(Error::NewtonDiverged {
        iterations: NEWTON_MAX_ITER,
        residual: rn,
    })
}

/// Row-major `d x d` field of matrices.
#[derive(Clone, Debug)]
pub struct MatrixField {
    dim: usize,
    entries: Vec<ScalarField>,
}

impl MatrixField {
    pub fn from_mats(grid: &Grid, mats: &[Mat]) -> Result<Self> {
        let dim = grid.dim();
        let entries = (0..dim * dim)
            .map(|e| ScalarField::from_samples(grid, mats.iter().map(|m| m.get(e / dim, e % dim)).collect()))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { dim, entries })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entry(&self, i: usize, j: usize) -> &ScalarField {
        &self.entries[i * self.dim + j]
    }

    pub fn entries(&self) -> &[ScalarField] {
        &self.entries
    }

    pub fn at(&self, flat: usize) -> Mat {
        let mut m = Mat::zeros(self.dim);
        for i in 0..self.dim {
            for j in 0..self.dim {
                m.set(i, j, self.entry(i, j).samples()[flat]);
            }
        }
        m
    }

    pub fn trace(&self) -> Result<ScalarField> {
        let grid = self.entries[0].grid();
        let s = (0..grid.len())
            .map(|p| (0..self.dim).map(|i| self.entry(i, i).samples()[p]).sum())
            .collect();
        ScalarField::from_samples(grid, s)
    }

    pub fn max_entry(&self) -> f64 {
        self.entries.iter().map(|e| e.max_abs()).fold(0.0, f64::max)
    }
}

/// Pointwise values of the reference flow at a single point.
#[derive(Clone, Copy, Debug)]
pub struct FlowPoint {
    pub y: Point,
    pub v: Point,
    pub dv: Mat,
    pub k: Mat,
    /// `I + t Dv0(y)`.
    pub jacobian: Mat,
}

/// Evaluates `v`, `Dv` and `K` at `x` through the inverted characteristic.
pub fn eval_point(reference: &BurgersRef, t: f64, x: &Point) -> Result<FlowPoint> {
    let dim = reference.dim;
    let y = invert_flow(reference, t, x)?;
    let dv0 = reference.dv0(&y);
    let id = Mat::identity(dim);
    let jacobian = id + dv0.scale(t);
    let inv = jacobian.inverse().ok_or(Error::NewtonDiverged {
        iterations: 0,
        residual: f64::INFINITY,
    })?;
    let dv = inv * dv0;
    let k = (inv * (dv0 - id)).scale(1.0 + t);
    Ok(FlowPoint {
        y,
        v: reference.v0(&y),
        dv,
        k,
        jacobian,
    })
}

/// Reference flow sampled on a grid at time `t`.
#[derive(Clone, Debug)]
pub struct BurgersEval {
    pub t: f64,
    pub v: VectorField,
    pub dv: MatrixField,
    pub k: MatrixField,
    /// Global `|D^2 v|_{L^inf}` by spectral differentiation of `Dv`.
    pub d2v_maxnorm: f64,
    /// `max |K|` entrywise over the grid.
    pub k_sup: f64,
    /// Largest entrywise gap in `Dv = I/(1+t) + K/(1+t)^2`.
    pub identity_residual: f64,
}

pub fn eval_burgers(reference: &BurgersRef, t: f64, grid: &Grid) -> Result<BurgersEval> {
    if !(t >= 0.0) {
        return Err(Error::Domain(format!("time {t} must be nonnegative")));
    }
    if grid.dim() != reference.dim {
        return Err(Error::Dimension("grid and reference dimensions differ".into()));
    }
    let dim = reference.dim;
    let points = grid
        .points()
        .map(|x| eval_point(reference, t, &x))
        .collect::<Result<Vec<_>>>()?;
    let v = VectorField::new(
        (0..dim)
            .map(|j| ScalarField::from_samples(grid, points.iter().map(|p| p.v[j]).collect()))
            .collect::<Result<Vec<_>>>()?,
    )?;
    let dvs: Vec<Mat> = points.iter().map(|p| p.dv).collect();
    let ks: Vec<Mat> = points.iter().map(|p| p.k).collect();
    let a = 1.0 / (1.0 + t);
    let identity_residual = dvs
        .iter()
        .zip(&ks)
        .map(|(dv, k)| (*dv - Mat::scalar(dim, a) - k.scale(a * a)).max_abs_entry())
        .fold(0.0, f64::max);
    let dv = MatrixField::from_mats(grid, &dvs)?;
    let k = MatrixField::from_mats(grid, &ks)?;
    let k_sup = k.max_entry();
    let d2v_maxnorm = d2v_maxnorm(&dv, None);
    Ok(BurgersEval {
        t,
        v,
        dv,
        k,
        d2v_maxnorm,
        k_sup,
        identity_residual,
    })
}

/// `max_x |D^2 v(x)|` (Euclidean norm of the third-order tensor) from spectral
/// derivatives of `Dv`, optionally restricted to a sample mask.
pub fn d2v_maxnorm(dv: &MatrixField, window: Option<&[bool]>) -> f64 {
    let grid = dv.entries[0].grid();
    let mut acc = vec![0.0; grid.len()];
    for e in &dv.entries {
        let spectra: Vec<Vec<Complex64>> = (0..grid.dim())
            .map(|a| derivative_spectrum(grid, e.spectrum(), a))
            .collect();
        let refs: Vec<&[Complex64]> = spectra.iter().map(|s| s.as_slice()).collect();
        for d in grid.inverse_real_many(&refs) {
            for (o, x) in acc.iter_mut().zip(d) {
                *o += x * x;
            }
        }
    }
    acc.iter()
        .enumerate()
        .filter(|(i, _)| window.is_none_or(|w| w[*i]))
        .map(|(_, x)| x.sqrt())
        .fold(0.0, f64::max)
}

/// One row of [`k_decay_series`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KDecayRow {
    pub t: f64,
    /// `|K(t)|_{\dot H^sigma}` per requested sigma.
    pub k_norms: Vec<f64>,
    pub d2v_maxnorm: f64,
    pub k_sup: f64,
}

/// Tabulates `|K(t)|_{\dot H^sigma}` and `|D^2 v(t)|_{L^inf}` over `times`.
///
/// `sobolev_index` is the regularity `s` of the reference; orders must lie in `(0, s-1]`.
pub fn k_decay_series(
    reference: &BurgersRef,
    grid: &Grid,
    times: &[f64],
    sigmas: &[f64],
    sobolev_index: f64,
) -> Result<Vec<KDecayRow>> {
    if times.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Domain("times must be strictly increasing".into()));
    }
    if let Some(&bad) = sigmas.iter().find(|&&s| !(s > 0.0 && s <= sobolev_index - 1.0)) {
        return Err(Error::Domain(format!("sigma {bad} outside (0, s-1]")));
    }
    times
        .iter()
        .map(|&t| {
            let ev = eval_burgers(reference, t, grid)?;
            let k_norms = sigmas
                .iter()
                .map(|&s| homogeneous_seminorm(ev.k.entries(), s))
                .collect::<Result<Vec<_>>>()?;
            Ok(KDecayRow {
                t,
                k_norms,
                d2v_maxnorm: ev.d2v_maxnorm,
                k_sup: ev.k_sup,
            })
        })
        .collect()
}

/// Flow data needed by the perturbation system at one time.
#[derive(Clone, Debug)]
pub enum FlowSamples {
    /// `v = M x`, `Dv = M` everywhere.
    Linear { m: Mat },
    /// Sampled component arrays: `v[j]`, `dv[j * d + k] = d_k v_j`.
    Sampled { v: Vec<Vec<f64>>, dv: Vec<Vec<f64>> },
}

impl FlowSamples {
    pub fn velocity(&self, grid: &Grid, flat: usize, j: usize) -> f64 {
        match self {
            FlowSamples::Linear { m } => {
                let p = grid.point(flat);
                (0..grid.dim()).map(|k| m.get(j, k) * p[k]).sum()
            }
            FlowSamples::Sampled { v, .. } => v[j][flat],
        }
    }

    pub fn gradient(&self, grid: &Grid, flat: usize, j: usize, k: usize) -> f64 {
        match self {
            FlowSamples::Linear { m } => m.get(j, k),
            FlowSamples::Sampled { dv, .. } => dv[j * grid.dim() + k][flat],
        }
    }
}

/// `v` and `Dv` on the grid; exact closed form when the perturbation is zero.
pub fn sample_flow(reference: &BurgersRef, t: f64, grid: &Grid) -> Result<FlowSamples> {
    let dim = reference.dim;
    if reference.is_linear() {
        let inv = (Mat::identity(dim) + reference.linear.scale(t))
            .inverse()
            .ok_or(Error::H0Violated(0.0))?;
        return Ok(FlowSamples::Linear {
            m: inv * reference.linear,
        });
    }
    let mut v = vec![vec![0.0; grid.len()]; dim];
    let mut dv = vec![vec![0.0; grid.len()]; dim * dim];
    for (flat, x) in grid.points().enumerate() {
        let p = eval_point(reference, t, &x)?;
        for j in 0..dim {
            v[j][flat] = p.v[j];
            for k in 0..dim {
                dv[j * dim + k][flat] = p.dv.get(j, k);
            }
        }
    }
    Ok(FlowSamples::Sampled { v, dv })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bump_ref(amplitude: f64, radius: f64) -> BurgersRef {
        BurgersRef::new(
            Mat::identity(1),
            Perturbation::Bumps(vec![BumpTerm {
                amplitude,
                center: [0.0; 3],
                radius,
                direction: [1.0, 0.0, 0.0],
            }]),
        )
        .unwrap()
    }

    #[test]
    fn dist_examples() {
        assert_eq!(dist_spectrum_negreals(&Mat::identity(1)).unwrap(), 1.0);
        let rot = Mat::from_rows(&[&[0.0, 1.0], &[-1.0, 0.0]]);
        assert!((dist_spectrum_negreals(&rot).unwrap() - 1.0).abs() < 1e-12);
        let sp = Mat::from_rows(&[&[-2.0, -3.0], &[3.0, -2.0]]);
        assert!((dist_spectrum_negreals(&sp).unwrap() - 3.0).abs() < 1e-12);
        assert_eq!(dist_spectrum_negreals(&Mat::scalar(1, -0.5)).unwrap(), 0.0);
    }

    #[test]
    fn h0_examples() {
        let g = Grid::new(1, 64, 20.0).unwrap();
        assert_eq!(check_h0(&BurgersRef::identity(1), &g).unwrap(), 1.0);
        let zero = BurgersRef::new(Mat::zeros(1), Perturbation::Zero).unwrap();
        assert!(matches!(check_h0(&zero, &g), Err(Error::H0Violated(_))));
    }

    #[test]
    fn h0_bump_margin_matches_bound() {
        // radius 2.5 keeps |bump'| <= 2.1704 / 2.5 < 1
        let g = Grid::new(1, 4096, 20.0).unwrap();
        let r = bump_ref(0.5, 2.5);
        let eps = check_h0(&r, &g).unwrap();
        assert!(eps >= 0.5, "{eps}");
        // dense sampling of 1 - a max|b'|
        let dense = (0..200_001)
            .map(|i| -2.5 + 5.0 * i as f64 / 200_000.0)
            .map(|x| r.dv0(&[x, 0.0, 0.0]).get(0, 0))
            .fold(f64::INFINITY, f64::min);
        assert!((eps - dense).abs() < 1e-4);
    }

    #[test]
    fn bump_derivatives_match_differences() {
        let term = BumpTerm {
            amplitude: 1.0,
            center: [0.1, -0.2, 0.3],
            radius: 1.3,
            direction: [1.0, 0.0, 0.0],
        };
        let x = [0.4, 0.1, 0.5];
        let h = 1e-5;
        let (_, g, hess) = term.profile(&x, 3);
        for a in 0..3 {
            let mut xp = x;
            let mut xm = x;
            xp[a] += h;
            xm[a] -= h;
            let (bp, gp, _) = term.profile(&xp, 3);
            let (bm, gm, _) = term.profile(&xm, 3);
            assert!(((bp - bm) / (2.0 * h) - g[a]).abs() < 1e-8);
            for c in 0..3 {
                assert!(((gp[c] - gm[c]) / (2.0 * h) - hess[c][a]).abs() < 1e-7);
            }
        }
    }

    #[test]
    fn linear_flow_inversion() {
        let r = BurgersRef::identity(2);
        let y = invert_flow(&r, 3.0, &[4.0, -8.0, 0.0]).unwrap();
        assert!((y[0] - 1.0).abs() < 1e-15 && (y[1] + 2.0).abs() < 1e-15);
        let r1 = bump_ref(0.3, 2.5);
        assert_eq!(invert_flow(&r1, 0.0, &[1.7, 0.0, 0.0]).unwrap(), [1.7, 0.0, 0.0]);
    }

    #[test]
    fn flow_round_trip() {
        let r = bump_ref(0.3, 2.5);
        for &t in &[0.5, 2.0, 10.0, 30.0] {
            for i in 0..200 {
                let x = [-40.0 + 0.4 * i as f64, 0.0, 0.0];
                let y = invert_flow(&r, t, &x).unwrap();
                let back = r.flow(t, &y);
                assert!((back[0] - x[0]).abs() < 1e-11, "t {t} x {}", x[0]);
            }
        }
    }

    #[test]
    fn eval_identity_reference() {
        let g = Grid::new(2, 16, 8.0).unwrap();
        let ev = eval_burgers(&BurgersRef::identity(2), 1.5, &g).unwrap();
        assert_eq!(ev.k_sup, 0.0);
        for (flat, x) in g.points().enumerate() {
            let dv = ev.dv.at(flat);
            assert!((dv - Mat::scalar(2, 1.0 / 2.5)).max_abs_entry() < 1e-15);
            assert!((ev.v.component(0).samples()[flat] - x[0] / 2.5).abs() < 1e-14);
        }
        assert!(ev.d2v_maxnorm < 1e-14);
    }

    #[test]
    fn eval_at_time_zero() {
        let g = Grid::new(1, 128, 16.0).unwrap();
        let r = bump_ref(0.3, 2.5);
        let ev = eval_burgers(&r, 0.0, &g).unwrap();
        for (flat, x) in g.points().enumerate() {
            let dv0 = r.dv0(&x);
            assert!((ev.dv.at(flat) - dv0).max_abs_entry() < 1e-15);
            assert!((ev.k.at(flat) - (dv0 - Mat::identity(1))).max_abs_entry() < 1e-15);
        }
        assert!(ev.identity_residual < DV_IDENTITY_TOL);
    }

    #[test]
    fn sampled_perturbation_agrees_with_analytic() {
        let g = Grid::new(1, 1024, 16.0).unwrap();
        let analytic = bump_ref(0.3, 2.5);
        let samples = VectorField::from_fn(&g, |p| {
            let v = analytic.v0(p);
            [v[0] - p[0], 0.0, 0.0]
        })
        .unwrap();
        let sampled = BurgersRef::new(
            Mat::identity(1),
            Perturbation::Sampled(SampledPerturbation::new(&samples).unwrap()),
        )
        .unwrap();
        for i in 0..50 {
            let x = [-3.0 + 0.123 * i as f64, 0.0, 0.0];
            assert!((sampled.v0(&x)[0] - analytic.v0(&x)[0]).abs() < 1e-6);
            assert!((sampled.dv0(&x).get(0, 0) - analytic.dv0(&x).get(0, 0)).abs() < 1e-4);
        }
        let e1 = check_h0(&sampled, &g).unwrap();
        let e2 = check_h0(&analytic, &g).unwrap();
        assert!((e1 - e2).abs() < 1e-4);
    }

    #[test]
    fn k_series_rejects_bad_input() {
        let g = Grid::new(1, 64, 16.0).unwrap();
        let r = BurgersRef::identity(1);
        assert!(k_decay_series(&r, &g, &[1.0, 0.5], &[0.5], 2.6).is_err());
        assert!(k_decay_series(&r, &g, &[0.5, 1.0], &[2.0], 2.6).is_err());
        let rows = k_decay_series(&r, &g, &[0.0, 1.0, 2.0], &[0.5, 1.0], 2.6).unwrap();
        assert!(rows.iter().all(|r| r.k_norms.iter().all(|&k| k == 0.0) && r.d2v_maxnorm == 0.0));
    }
}

use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::burgers::{sample_flow, BurgersRef, FlowSamples};
use crate::coupling::{pow_clamped, potential_gradient_spectra, CouplingCase, PhysParams, CLAMP_WARN};
use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::spectral::{derivative_spectrum, truncate_spectrum, Components, Grid, Point, ScalarField, VectorField};

/// Default Courant factor.
pub const CFL_FACTOR: f64 = 0.4;
/// Fraction of the half box, measured from the centre, beyond which support is "near the edge".
pub const GUARD_EDGE_FRACTION: f64 = 0.9;
/// Relative threshold defining the support region watched by the guard.
pub const GUARD_THRESHOLD: f64 = 1e-8;
/// `min rho >= -HEALTH_FLOOR * max(1, max rho)` on every accepted state.
pub const HEALTH_FLOOR: f64 = 1e-6;

type Spectra = Vec<Vec<Complex64>>;

/// Perturbation unknowns `(rho, w)` at time `t`.
#[derive(Clone, Debug)]
pub struct MakinoState {
    pub t: f64,
    pub rho: ScalarField,
    pub w: VectorField,
}

impl MakinoState {
    pub fn new(t: f64, rho: ScalarField, w: VectorField) -> Result<Self> {
        if w.grid() != rho.grid() {
            return Err(Error::GridMismatch);
        }
        if w.len() != rho.grid().dim() {
            return Err(Error::Dimension("w needs one component per axis".into()));
        }
        if !t.is_finite() {
            return Err(Error::Domain("time must be finite".into()));
        }
        Ok(Self { t, rho, w })
    }

    pub fn zeros(grid: &Grid, t: f64) -> Self {
        Self {
            t,
            rho: ScalarField::zeros(grid),
            w: VectorField::zeros(grid),
        }
    }

    pub fn grid(&self) -> &Grid {
        self.rho.grid()
    }

    pub(crate) fn spectra(&self) -> Spectra {
        self.scalar_components().iter().map(|c| c.spectrum().to_vec()).collect()
    }

    pub(crate) fn from_spectra(grid: &Grid, t: f64, spectra: Spectra) -> Result<Self> {
        let refs: Vec<&[Complex64]> = spectra.iter().map(|s| s.as_slice()).collect();
        let samples = grid.inverse_real_many(&refs);
        let mut comps = samples
            .into_iter()
            .zip(spectra)
            .map(|(s, c)| ScalarField::from_parts(grid, s, c))
            .collect::<Result<Vec<_>>>()?;
        let rho = comps.remove(0);
        Self::new(t, rho, VectorField::new(comps)?)
    }
}

impl Components for MakinoState {
    fn scalar_components(&self) -> Vec<&ScalarField> {
        let mut v = vec![&self.rho];
        v.extend(self.w.components());
        v
    }
}

/// Pointwise summary of a state, gathered while forming the right-hand side.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct StateInfo {
    /// `max |v + w|` over the whole box.
    pub max_speed: f64,
    pub max_rho: f64,
    pub min_rho: f64,
    /// `max (|rho| + |w|)`.
    pub max_amplitude: f64,
    /// `max (|rho| + |w|)` over the edge band watched by the guard.
    pub edge_amplitude: f64,
}

impl StateInfo {
    /// `C_cfl dx / (max|v+w| + max rho (gamma-1)/2)`.
    pub fn cfl_bound(&self, grid: &Grid, params: &PhysParams, factor: f64) -> f64 {
        let denom = self.max_speed + self.max_rho.max(0.0) * 0.5 * (params.gamma - 1.0);
        if denom == 0.0 {
            f64::INFINITY
        } else {
            factor * grid.spacing() / denom
        }
    }

    pub fn healthy(&self) -> bool {
        self.min_rho >= -HEALTH_FLOOR * self.max_rho.max(1.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GuardSignal {
    Ok,
    SupportNearBoundary,
}

fn edge_mask(grid: &Grid) -> Vec<bool> {
    let lim = GUARD_EDGE_FRACTION * 0.5 * grid.length();
    grid.points()
        .map(|p| p[..grid.dim()].iter().any(|x| x.abs() >= lim))
        .collect()
}

fn amplitude(fields: &[&[f64]], p: usize) -> f64 {
    let w2: f64 = fields[1..].iter().map(|f| f[p] * f[p]).sum();
    fields[0][p].abs() + w2.sqrt()
}

/// Flags states whose `|rho| + |w| > threshold` region reaches within 10% of the box edge.
pub fn horizon_guard(state: &MakinoState, threshold: f64) -> GuardSignal {
    let grid = state.grid();
    let fields: Vec<&[f64]> = state.scalar_components().iter().map(|c| c.samples()).collect();
    let near = edge_mask(grid)
        .iter()
        .enumerate()
        .any(|(p, &e)| e && amplitude(&fields, p) > threshold);
    if near {
        GuardSignal::SupportNearBoundary
    } else {
        GuardSignal::Ok
    }
}

/// The truncated perturbation system around a fixed reference flow.
#[derive(Debug)]
pub struct Model {
    grid: Grid,
    params: PhysParams,
    reference: BurgersRef,
    radius: f64,
    coords: Vec<Point>,
    edge: Vec<bool>,
    flows: Vec<(f64, Arc<FlowSamples>)>,
    clamp_events: usize,
    discarded_mean: f64,
}

impl Model {
    pub fn new(grid: &Grid, params: PhysParams, reference: BurgersRef, allow_unsafe: bool) -> Result<Self> {
        params.validate()?;
        if reference.dim() != grid.dim() {
            return Err(Error::Dimension("reference and grid dimensions differ".into()));
        }
        if !allow_unsafe {
            match params.case() {
                CouplingCase::Poisson if grid.dim() < 3 => {
                    return Err(Error::Dimension("Poisson requires d≥3".into()))
                }
                CouplingCase::Helmholtz if grid.dim() < 2 => {
                    return Err(Error::Dimension("Helmholtz requires d≥2".into()))
                }
                _ => {}
            }
        }
        Ok(Self {
            grid: grid.clone(),
            params,
            reference,
            radius: grid.dealias_radius(),
            coords: grid.points().collect(),
            edge: edge_mask(grid),
            flows: Vec::new(),
            clamp_events: 0,
            discarded_mean: 0.0,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn params(&self) -> &PhysParams {
        &self.params
    }

    pub fn reference(&self) -> &BurgersRef {
        &self.reference
    }

    /// Number of right-hand-side evaluations that had to clamp negative `rho`.
    pub fn clamp_events(&self) -> usize {
        self.clamp_events
    }

    /// Source mean dropped by the latest Poisson inversion.
    pub fn discarded_mean(&self) -> f64 {
        self.discarded_mean
    }

    fn flow(&mut self, t: f64) -> Result<Arc<FlowSamples>> {
        if let Some((_, f)) = self.flows.iter().find(|(s, _)| *s == t) {
            return Ok(f.clone());
        }
        let f = Arc::new(sample_flow(&self.reference, t, &self.grid)?);
        if self.flows.len() >= 3 {
            self.flows.remove(0);
        }
        self.flows.push((t, f.clone()));
        Ok(f)
    }

    /// Truncated right-hand side on spectral coefficients `[rho, w_1..w_d]`.
    pub(crate) fn rhs_spectral(&mut self, t: f64, y: &[Vec<Complex64>]) -> Result<(Spectra, StateInfo)> {
        let grid = self.grid.clone();
        let d = grid.dim();
        let n = grid.len();
        let mut derivs: Spectra = Vec::with_capacity(d + d * d);
        for a in 0..d {
            derivs.push(derivative_spectrum(&grid, &y[0], a));
        }
        for j in 0..d {
            for k in 0..d {
                derivs.push(derivative_spectrum(&grid, &y[1 + j], k));
            }
        }
        let mut refs: Vec<&[Complex64]> = y.iter().map(|s| s.as_slice()).collect();
        refs.extend(derivs.iter().map(|s| s.as_slice()));
        let phys = grid.inverse_real_many(&refs);
        drop(derivs);

        let flow = self.flow(t)?;
        let coupled = self.params.case() != CouplingCase::Euler;
        let h = 0.5 * (self.params.gamma - 1.0);
        let e = self.params.density_exponent();
        let mut out = vec![vec![0.0; n]; 1 + d];
        let mut source = if coupled { vec![0.0; n] } else { Vec::new() };
        let mut info = StateInfo {
            min_rho: f64::INFINITY,
            max_rho: f64::NEG_INFINITY,
            ..StateInfo::default()
        };

        let rho = &phys[0];
        let w = &phys[1..1 + d];
        let grad_rho = &phys[1 + d..1 + 2 * d];
        let grad_w = &phys[1 + 2 * d..];
        let mut body = |p: usize, v: &[f64; 3], dv: &Mat| {
            let r = rho[p];
            let mut u = [0.0; 3];
            let mut div = 0.0;
            let mut w2 = 0.0;
            let mut u2 = 0.0;
            for j in 0..d {
                u[j] = v[j] + w[j][p];
                div += grad_w[j * d + j][p] + dv.get(j, j);
                w2 += w[j][p] * w[j][p];
                u2 += u[j] * u[j];
            }
            let mut adv = 0.0;
            for k in 0..d {
                adv += u[k] * grad_rho[k][p];
            }
            out[0][p] = adv + h * r * div;
            for j in 0..d {
                let mut s = h * r * grad_rho[j][p];
                for k in 0..d {
                    s += u[k] * grad_w[j * d + k][p] + dv.get(j, k) * w[k][p];
                }
                out[1 + j][p] = s;
            }
            if coupled {
                source[p] = pow_clamped(r, e);
            }
            let amp = r.abs() + w2.sqrt();
            info.max_speed = info.max_speed.max(u2.sqrt());
            info.max_rho = info.max_rho.max(r);
            info.min_rho = info.min_rho.min(r);
            info.max_amplitude = info.max_amplitude.max(amp);
            if self.edge[p] {
                info.edge_amplitude = info.edge_amplitude.max(amp);
            }
        };
        match flow.as_ref() {
            FlowSamples::Linear { m } => {
                for p in 0..n {
                    let v = m.mul_vec(&self.coords[p]);
                    body(p, &v, m);
                }
            }
            FlowSamples::Sampled { v, dv } => {
                let mut vp = [0.0; 3];
                let mut dm = Mat::zeros(d);
                for p in 0..n {
                    for j in 0..d {
                        vp[j] = v[j][p];
                        for k in 0..d {
                            dm.set(j, k, dv[j * d + k][p]);
                        }
                    }
                    body(p, &vp, &dm);
                }
            }
        }

        if info.min_rho < -CLAMP_WARN * info.max_rho.max(0.0) {
            self.clamp_events += 1;
        }
        let mut fields: Vec<&[f64]> = out.iter().map(|o| o.as_slice()).collect();
        if coupled {
            fields.push(&source);
        }
        let mut spectra = grid.forward_real_many(&fields);
        for s in spectra.iter_mut() {
            truncate_spectrum(&grid, s, self.radius);
        }
        if coupled {
            let src = spectra.pop().unwrap();
            if self.params.case() == CouplingCase::Poisson {
                self.discarded_mean = src[0].re;
            }
            let kappa = self.params.kappa;
            let gphi = potential_gradient_spectra(&grid, &src, &self.params);
            for (j, g) in gphi.iter().enumerate() {
                for (o, &x) in spectra[1 + j].iter_mut().zip(g) {
                    *o = -*o + x * kappa;
                }
            }
            for o in spectra[0].iter_mut() {
                *o = -*o;
            }
        } else {
            for s in spectra.iter_mut() {
                for o in s.iter_mut() {
                    *o = -*o;
                }
            }
        }
        Ok((spectra, info))
    }

    /// One classical RK4 step from `t` with caller-supplied stage times, so that
    /// repeated stepping reuses the sampled reference flow.
    pub(crate) fn rk4_spectral(
        &mut self,
        times: [f64; 3],
        dt: f64,
        y: &[Vec<Complex64>],
        k1: Spectra,
    ) -> Result<Spectra> {
        let axpy = |y: &[Vec<Complex64>], k: &[Vec<Complex64>], c: f64| -> Spectra {
            y.iter()
                .zip(k)
                .map(|(a, b)| a.iter().zip(b).map(|(&p, &q)| p + q * c).collect())
                .collect()
        };
        let k2 = self.rhs_spectral(times[1], &axpy(y, &k1, 0.5 * dt))?.0;
        let k3 = self.rhs_spectral(times[1], &axpy(y, &k2, 0.5 * dt))?.0;
        let k4 = self.rhs_spectral(times[2], &axpy(y, &k3, dt))?.0;
        let c = dt / 6.0;
        let mut next: Spectra = Vec::with_capacity(y.len());
        for i in 0..y.len() {
            let mut s: Vec<Complex64> = (0..y[i].len())
                .map(|p| y[i][p] + (k1[i][p] + (k2[i][p] + k3[i][p]) * 2.0 + k4[i][p]) * c)
                .collect();
            truncate_spectrum(&self.grid, &mut s, self.radius);
            next.push(s);
        }
        Ok(next)
    }

    /// Pointwise summary of a state without forming the right-hand side.
    pub fn inspect(&mut self, state: &MakinoState) -> Result<StateInfo> {
        Ok(self.rhs_spectral(state.t, &state.spectra())?.1)
    }

    /// Whether the support of `state` sits inside the guarded region for `threshold`.
    pub fn guard_signal(&self, info: &StateInfo, threshold: f64) -> GuardSignal {
        if info.edge_amplitude > threshold {
            GuardSignal::SupportNearBoundary
        } else {
            GuardSignal::Ok
        }
    }

    #[allow(dead_code)]
    pub(crate) fn edge(&self) -> &[bool] {
        &self.edge
    }
}

/// Time derivative `(d rho/dt, d w/dt)` of the truncated perturbation system.
pub fn bb_rhs(state: &MakinoState, model: &mut Model) -> Result<(ScalarField, VectorField)> {
    if state.grid() != model.grid() {
        return Err(Error::GridMismatch);
    }
    let (spectra, _) = model.rhs_spectral(state.t, &state.spectra())?;
    let s = MakinoState::from_spectra(model.grid(), state.t, spectra)?;
    Ok((s.rho, s.w))
}

/// Classical RK4 step of size `dt`, rejecting steps above the CFL bound.
pub fn rk4_step(state: &MakinoState, dt: f64, model: &mut Model) -> Result<MakinoState> {
    rk4_step_with_factor(state, dt, model, CFL_FACTOR)
}

pub fn rk4_step_with_factor(state: &MakinoState, dt: f64, model: &mut Model, cfl: f64) -> Result<MakinoState> {
    if state.grid() != model.grid() {
        return Err(Error::GridMismatch);
    }
    if !(dt > 0.0) {
        return Err(Error::InvalidParams(format!("dt={dt} must be positive")));
    }
    let y = state.spectra();
    let (k1, info) = model.rhs_spectral(state.t, &y)?;
    let bound = info.cfl_bound(model.grid(), model.params(), cfl);
    if dt > bound {
        return Err(Error::CflViolation { dt, bound });
    }
    let t = state.t;
    let next = model.rk4_spectral([t, t + 0.5 * dt, t + dt], dt, &y, k1)?;
    MakinoState::from_spectra(model.grid(), t + dt, next)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::friedrichs_project;

    fn euler_model(grid: &Grid, gamma: f64) -> Model {
        Model::new(grid, PhysParams::euler(gamma).unwrap(), BurgersRef::identity(grid.dim()), false).unwrap()
    }

    #[test]
    fn zero_is_fixed_point() {
        let g = Grid::new(2, 16, 10.0).unwrap();
        let mut m = euler_model(&g, 1.4);
        let z = MakinoState::zeros(&g, 0.3);
        let (dr, dw) = bb_rhs(&z, &mut m).unwrap();
        assert_eq!(dr.max_abs(), 0.0);
        assert_eq!(dw.max_magnitude(), 0.0);
        let next = rk4_step(&z, 0.01, &mut m).unwrap();
        assert_eq!(next.rho.max_abs(), 0.0);
        assert!((next.t - 0.31).abs() < 1e-15);
    }

    #[test]
    fn single_mode_velocity_terms() {
        // kappa = 0, rho = 0, w = a sin(k x), v = x/(1+t):
        // dw/dt = -J(w w') - w/(1+t) - v w'
        let g = Grid::new(1, 128, 20.0).unwrap();
        let mut m = euler_model(&g, 2.0);
        let k = 2.0 * std::f64::consts::PI * 3.0 / 20.0;
        let a = 1e-2;
        let t = 0.5;
        let w = ScalarField::from_fn(&g, |p| a * (k * p[0]).sin()).unwrap();
        let s = MakinoState::new(t, ScalarField::zeros(&g), VectorField::new(vec![w]).unwrap()).unwrap();
        let (dr, dw) = bb_rhs(&s, &mut m).unwrap();
        assert!(dr.max_abs() < 1e-15);
        let raw = ScalarField::from_fn(&g, |p| {
            let x = p[0];
            let w = a * (k * x).sin();
            let wx = a * k * (k * x).cos();
            -(w * wx) - w / (1.0 + t) - x / (1.0 + t) * wx
        })
        .unwrap();
        let want = friedrichs_project(&raw, g.dealias_radius()).unwrap();
        let err = dw
            .component(0)
            .samples()
            .iter()
            .zip(want.samples())
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-12, "{err}");
    }

    #[test]
    fn cfl_rejection() {
        let g = Grid::new(1, 64, 10.0).unwrap();
        let mut m = euler_model(&g, 2.0);
        let s = MakinoState::zeros(&g, 0.0);
        // max |v| = L/2 = 5, dx = 10/64: bound = 0.4 * 0.15625 / 5 = 0.0125
        assert!(matches!(rk4_step(&s, 0.02, &mut m), Err(Error::CflViolation { .. })));
        assert!(rk4_step(&s, 0.0125, &mut m).is_ok());
    }

    #[test]
    fn guard_examples() {
        let g = Grid::new(1, 256, 40.0).unwrap();
        let inside = MakinoState::new(
            0.0,
            ScalarField::from_fn(&g, |p| (-p[0] * p[0]).exp()).unwrap(),
            VectorField::zeros(&g),
        )
        .unwrap();
        assert_eq!(horizon_guard(&inside, 1e-8), GuardSignal::Ok);
        let shifted = MakinoState::new(
            0.0,
            ScalarField::from_fn(&g, |p| (-(p[0] - 19.0).powi(2)).exp()).unwrap(),
            VectorField::zeros(&g),
        )
        .unwrap();
        assert_eq!(horizon_guard(&shifted, 1e-8), GuardSignal::SupportNearBoundary);
    }

    #[test]
    fn poisson_model_needs_three_dimensions() {
        let g = Grid::new(2, 8, 1.0).unwrap();
        let p = PhysParams::new(1.4, 1.0, 1.0, 0.0, 1.0).unwrap();
        assert!(Model::new(&g, p, BurgersRef::identity(2), false).is_err());
        assert!(Model::new(&g, p, BurgersRef::identity(2), true).is_ok());
    }
}

use serde::{Deserialize, Serialize};

use crate::burgers::{bump_with_gradient, check_h0, BurgersRef};
use crate::coupling::{density_power, potential_gradient_spectra, CouplingCase, PhysParams};
use crate::diagnostics::mass;
use crate::error::{Error, Result};
use crate::spectral::{
    friedrichs_project, homogeneous_seminorm, sobolev_norm, Grid, NormSpec, Point, ScalarField, VectorField,
};

use super::admissibility::admissibility_check;
use super::model::{GuardSignal, MakinoState, Model, StateInfo, CFL_FACTOR, GUARD_THRESHOLD};

/// Smallness default for `|(rho0, w0)|_{H^s}`.
pub const DEFAULT_DELTA: f64 = 1e-2;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Profile {
    /// `exp(-|x-c|^2 / (2 width^2))`.
    Gaussian { width: f64 },
    /// `bump(|x-c| / radius)`, compactly supported.
    Bump { radius: f64 },
}

impl Default for Profile {
    fn default() -> Self {
        Profile::Gaussian { width: 1.0 }
    }
}

impl Profile {
    fn scale(&self) -> f64 {
        match *self {
            Profile::Gaussian { width } => width,
            Profile::Bump { radius } => radius,
        }
    }

    fn eval(&self, x: &Point, c: &Point, dim: usize) -> (f64, Point) {
        match *self {
            Profile::Gaussian { width } => {
                let mut r2 = 0.0;
                for a in 0..dim {
                    r2 += (x[a] - c[a]).powi(2);
                }
                let g = (-r2 / (2.0 * width * width)).exp();
                let mut grad = [0.0; 3];
                for a in 0..dim {
                    grad[a] = -(x[a] - c[a]) / (width * width) * g;
                }
                (g, grad)
            }
            Profile::Bump { radius } => bump_with_gradient(x, c, radius, dim),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VelocityKind {
    #[default]
    Zero,
    Gradient,
    DivergenceFree,
}

/// Recipe for `(rho0, w0)`; the pair is rescaled to `H^s` norm `delta`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialData {
    #[serde(default)]
    pub profile: Profile,
    #[serde(default)]
    pub center: Point,
    #[serde(default = "one")]
    pub density_weight: f64,
    #[serde(default)]
    pub velocity: VelocityKind,
    #[serde(default = "half")]
    pub velocity_weight: f64,
}

fn one() -> f64 {
    1.0
}

fn half() -> f64 {
    0.5
}

impl Default for InitialData {
    fn default() -> Self {
        Self {
            profile: Profile::default(),
            center: [0.0; 3],
            density_weight: 1.0,
            velocity: VelocityKind::Zero,
            velocity_weight: 0.5,
        }
    }
}

/// Builds the band-limited initial pair with `|(rho0, w0)|_{H^s} = delta`.
pub fn build_initial(grid: &Grid, data: &InitialData, s: f64, delta: f64) -> Result<MakinoState> {
    let dim = grid.dim();
    if !(data.profile.scale() > 0.0) {
        return Err(Error::InvalidParams("profile scale must be positive".into()));
    }
    if data.velocity == VelocityKind::DivergenceFree && dim == 1 {
        return Err(Error::InvalidParams("no divergence-free profile in one dimension".into()));
    }
    if !(delta >= 0.0) || !delta.is_finite() {
        return Err(Error::InvalidParams("delta must be nonnegative".into()));
    }
    let ell = data.profile.scale();
    let values: Vec<(f64, Point)> = grid.points().map(|x| data.profile.eval(&x, &data.center, dim)).collect();
    let rho = ScalarField::from_samples(grid, values.iter().map(|(g, _)| data.density_weight * g).collect())?;
    let vel = |g: &Point| -> Point {
        let c = data.velocity_weight * ell;
        match data.velocity {
            VelocityKind::Zero => [0.0; 3],
            VelocityKind::Gradient => [c * g[0], c * g[1], c * g[2]],
            VelocityKind::DivergenceFree if dim == 2 => [-c * g[1], c * g[0], 0.0],
            VelocityKind::DivergenceFree => [c * (g[1] - g[2]), c * (g[2] - g[0]), c * (g[0] - g[1])],
        }
    };
    let w_comps = (0..dim)
        .map(|j| ScalarField::from_samples(grid, values.iter().map(|(_, g)| vel(g)[j]).collect()))
        .collect::<Result<Vec<_>>>()?;
    let radius = grid.dealias_radius();
    let rho = friedrichs_project(&rho, radius)?;
    let w = w_comps
        .iter()
        .map(|c| friedrichs_project(c, radius))
        .collect::<Result<Vec<_>>>()?;
    let raw = MakinoState::new(0.0, rho, VectorField::new(w)?)?;
    let norm = sobolev_norm(&raw, NormSpec::inhomogeneous(s)?)?;
    if norm == 0.0 {
        return Ok(MakinoState::zeros(grid, 0.0));
    }
    let c = delta / norm;
    let w = raw.w.components().iter().map(|f| f.scale(c)).collect::<Result<Vec<_>>>()?;
    MakinoState::new(0.0, raw.rho.scale(c)?, VectorField::new(w)?)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum StepControl {
    /// Step fixed from the Courant bound of the initial state with this factor.
    Cfl(f64),
    /// Requested step; shortened if needed so outputs land on exact multiples.
    Fixed(f64),
}

impl Default for StepControl {
    fn default() -> Self {
        StepControl::Cfl(CFL_FACTOR)
    }
}

/// Everything one trajectory needs.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub grid: Grid,
    pub params: PhysParams,
    pub reference: BurgersRef,
    /// Sobolev index `s` (must exceed `1 + d/2`).
    pub sobolev_index: f64,
    pub t_end: f64,
    pub step: StepControl,
    pub output_dt: f64,
    /// Orders `sigma` tracked in the norm series.
    pub sigmas: Vec<f64>,
    /// Smallness `delta` of `|(rho0, w0)|_{H^s}`.
    pub delta: f64,
    pub initial: InitialData,
    /// Skip the admissibility and dimension constraints.
    pub allow_unsafe: bool,
}

impl RunConfig {
    /// Number of outputs after the initial one.
    pub fn output_count(&self) -> Result<usize> {
        if !(self.t_end > 0.0) || !(self.output_dt > 0.0) {
            return Err(Error::InvalidParams("t_end and output_dt must be positive".into()));
        }
        let q = self.t_end / self.output_dt;
        let k = q.round();
        if k < 1.0 || (q - k).abs() > 1e-9 * q.max(1.0) {
            return Err(Error::InvalidParams(format!(
                "t_end={} is not a multiple of output_dt={}",
                self.t_end, self.output_dt
            )));
        }
        Ok(k as usize)
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        let d = self.grid.dim() as f64;
        if !(self.sobolev_index > 1.0 + d / 2.0) {
            return Err(Error::InvalidParams(format!(
                "s={} must exceed 1+d/2={}",
                self.sobolev_index,
                1.0 + d / 2.0
            )));
        }
        self.output_count()?;
        match self.step {
            StepControl::Cfl(c) if !(c > 0.0) => {
                return Err(Error::InvalidParams("CFL factor must be positive".into()))
            }
            StepControl::Fixed(dt) if !(dt > 0.0) => {
                return Err(Error::InvalidParams("dt must be positive".into()))
            }
            _ => {}
        }
        if let Some(bad) = self.sigmas.iter().find(|s| !(**s >= 0.0) || !s.is_finite()) {
            return Err(Error::InvalidParams(format!("norm order {bad} must be nonnegative")));
        }
        if !(self.delta > 0.0) {
            return Err(Error::InvalidParams("delta must be positive".into()));
        }
        if self.reference.dim() != self.grid.dim() {
            return Err(Error::Dimension("reference and grid dimensions differ".into()));
        }
        Ok(())
    }
}

/// Diagnostics at one output time.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Record {
    pub t: f64,
    /// `X_sigma = |(rho, w)|_{\dot H^sigma}` for each tracked order.
    pub norms: Vec<f64>,
    /// Inhomogeneous `H^s` norm.
    pub hs_norm: f64,
    pub mass: f64,
    pub min_rho: f64,
    pub max_rho: f64,
    /// `|kappa grad phi|_{L^2}`.
    pub forcing_l2: f64,
    /// Poisson source mean removed at this time.
    pub discarded_mean: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum StopReason {
    Completed,
    /// The guard tripped at time `t`; the run ended cleanly there.
    HorizonGuard { t: f64 },
    /// A numerical failure at time `t`.
    Failed { t: f64, error: Error },
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub records: Vec<Record>,
    pub stop: StopReason,
    pub dt: f64,
    pub steps: usize,
    pub steps_per_output: usize,
    pub guard_threshold: f64,
    pub initial_hs_norm: f64,
    pub clamp_events: usize,
    pub final_state: MakinoState,
}

fn record(state: &MakinoState, cfg: &RunConfig, model: &Model, info: &StateInfo) -> Result<Record> {
    let norms = cfg
        .sigmas
        .iter()
        .map(|&s| homogeneous_seminorm(state, s))
        .collect::<Result<Vec<_>>>()?;
    let hs_norm = sobolev_norm(state, NormSpec::inhomogeneous(cfg.sobolev_index)?)?;
    let forcing_l2 = if cfg.params.case() == CouplingCase::Euler {
        0.0
    } else {
        let src = density_power(&state.rho, cfg.params.gamma)?;
        let g = potential_gradient_spectra(state.grid(), src.field.spectrum(), &cfg.params);
        let e: f64 = g.iter().flat_map(|c| c.iter()).map(|z| z.norm_sqr()).sum();
        cfg.params.kappa.abs() * (e * state.grid().volume()).sqrt()
    };
    Ok(Record {
        t: state.t,
        norms,
        hs_norm,
        mass: mass(state, &cfg.params)?,
        min_rho: info.min_rho,
        max_rho: info.max_rho,
        forcing_l2,
        discarded_mean: model.discarded_mean(),
    })
}

/// Runs the configured experiment from its recipe initial data.
pub fn integrate(cfg: &RunConfig) -> Result<Trajectory> {
    cfg.validate()?;
    let d = cfg.grid.dim();
    let verdict = admissibility_check(d, cfg.params.gamma, cfg.sobolev_index, cfg.params.kappa, cfg.params.mu)?;
    if !verdict.admissible && !cfg.allow_unsafe {
        return Err(Error::Inadmissible(verdict.violations.join("; ")));
    }
    check_h0(&cfg.reference, &cfg.grid)?;
    let initial = build_initial(&cfg.grid, &cfg.initial, cfg.sobolev_index, cfg.delta)?;
    integrate_from(cfg, initial)
}

/// Runs from a caller-supplied state (the recipe in `cfg.initial` is ignored).
pub fn integrate_from(cfg: &RunConfig, initial: MakinoState) -> Result<Trajectory> {
    cfg.validate()?;
    if initial.grid() != &cfg.grid {
        return Err(Error::GridMismatch);
    }
    let outputs = cfg.output_count()?;
    let mut model = Model::new(&cfg.grid, cfg.params, cfg.reference.clone(), cfg.allow_unsafe)?;
    let radius = cfg.grid.dealias_radius();
    let mut y = initial.spectra();
    for s in y.iter_mut() {
        crate::spectral::truncate_spectrum(&cfg.grid, s, radius);
    }
    let t0 = initial.t;
    let mut state = MakinoState::from_spectra(&cfg.grid, t0, y.clone())?;
    let initial_hs_norm = sobolev_norm(&state, NormSpec::inhomogeneous(cfg.sobolev_index)?)?;
    if initial_hs_norm > cfg.delta * (1.0 + 1e-9) {
        return Err(Error::InvalidParams(format!(
            "initial H^s norm {initial_hs_norm:e} exceeds smallness {:e}",
            cfg.delta
        )));
    }

    let (mut k1, mut info) = model.rhs_spectral(t0, &y)?;
    let threshold = GUARD_THRESHOLD * info.max_amplitude;
    let requested = match cfg.step {
        StepControl::Cfl(c) => info.cfl_bound(&cfg.grid, &cfg.params, c),
        StepControl::Fixed(dt) => dt,
    };
    let spo = if requested.is_finite() {
        ((cfg.output_dt / requested) * (1.0 - 1e-12)).ceil().max(1.0) as usize
    } else {
        1
    };
    let dt = cfg.output_dt / spo as f64;
    let cfl_factor = match cfg.step {
        StepControl::Cfl(c) => c,
        StepControl::Fixed(_) => CFL_FACTOR,
    };

    let mut records = vec![record(&state, cfg, &model, &info)?];
    let total = outputs * spo;
    let mut stop = StopReason::Completed;
    let mut n = 0usize;
    loop {
        let t = t0 + n as f64 * dt;
        if !info.healthy() {
            stop = StopReason::Failed {
                t,
                error: Error::HealthViolation { t, min_rho: info.min_rho },
            };
            break;
        }
        if model.guard_signal(&info, threshold) == GuardSignal::SupportNearBoundary {
            stop = StopReason::HorizonGuard { t };
            break;
        }
        if n == total {
            break;
        }
        let bound = info.cfl_bound(&cfg.grid, &cfg.params, cfl_factor);
        if dt > bound * (1.0 + 1e-12) {
            stop = StopReason::Failed {
                t,
                error: Error::CflViolation { dt, bound },
            };
            break;
        }
        let times = [t, t0 + (n as f64 + 0.5) * dt, t0 + (n + 1) as f64 * dt];
        let next = match model.rk4_spectral(times, dt, &y, k1) {
            Ok(v) => v,
            Err(error) => {
                stop = StopReason::Failed { t, error };
                break;
            }
        };
        n += 1;
        y = next;
        let tn = times[2];
        match model.rhs_spectral(tn, &y) {
            Ok((k, i)) => {
                k1 = k;
                info = i;
            }
            Err(error) => {
                stop = StopReason::Failed { t: tn, error };
                break;
            }
        }
        if n.is_multiple_of(spo) {
            // Exact output times, free of the rounding in n * dt.
            let to = t0 + (n / spo) as f64 * cfg.output_dt;
            state = MakinoState::from_spectra(&cfg.grid, to, y.clone())?;
            if info.healthy() {
                records.push(record(&state, cfg, &model, &info)?);
            }
        }
    }
    let t_last = if n.is_multiple_of(spo) {
        t0 + (n / spo) as f64 * cfg.output_dt
    } else {
        t0 + n as f64 * dt
    };
    if state.t != t_last {
        state = MakinoState::from_spectra(&cfg.grid, t_last, y)?;
    }
    Ok(Trajectory {
        records,
        stop,
        dt,
        steps: n,
        steps_per_output: spo,
        guard_threshold: threshold,
        initial_hs_norm,
        clamp_events: model.clamp_events(),
        final_state: state,
    })
}

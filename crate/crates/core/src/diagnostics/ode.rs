use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative tolerance of the adaptive integrator.
pub const ODE_RTOL: f64 = 1e-9;
/// Steps shorter than this fraction of the horizon count as a collapse.
pub const STEP_FLOOR: f64 = 1e-12;

/// Parameters of the saturated bootstrap inequality
/// `Y' = -a Y/(1+t) + C (Y/(1+t)^2 + Y^2 + (1+t)^{m'-1} Y^{m+1})`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OdeParams {
    pub a: f64,
    pub m: f64,
    pub m_prime: f64,
    /// Forcing constant; zero gives the linear homogeneous equation.
    pub c: f64,
    pub y0: f64,
}

impl OdeParams {
    pub fn new(a: f64, m: f64, m_prime: f64, c: f64, y0: f64) -> Result<Self> {
        let p = Self { a, m, m_prime, c, y0 };
        p.validate()?;
        Ok(p)
    }

    /// `a > 1`, `m > 0`, `m' < m a`, `C >= 0`, `Y0 >= 0`.
    pub fn validate(&self) -> Result<()> {
        let all_finite = [self.a, self.m, self.m_prime, self.c, self.y0].iter().all(|x| x.is_finite());
        if !all_finite {
            return Err(Error::InvalidParams("ODE parameters must be finite".into()));
        }
        if !(self.a > 1.0) {
            return Err(Error::InvalidParams(format!("a={} must exceed 1", self.a)));
        }
        if !(self.m > 0.0) {
            return Err(Error::InvalidParams(format!("m={} must be positive", self.m)));
        }
        if !(self.m_prime < self.m * self.a) {
            return Err(Error::InvalidParams(format!(
                "m'={} must be below m a={}",
                self.m_prime,
                self.m * self.a
            )));
        }
        if !(self.c >= 0.0) || !(self.y0 >= 0.0) {
            return Err(Error::InvalidParams("C and Y0 must be nonnegative".into()));
        }
        Ok(())
    }

    pub fn with_y0(&self, y0: f64) -> Self {
        Self { y0, ..*self }
    }

    fn rhs(&self, t: f64, y: f64) -> f64 {
        let s = 1.0 + t;
        let y = y.max(0.0);
        -self.a * y / s + self.c * (y / (s * s) + y * y + s.powf(self.m_prime - 1.0) * y.powf(self.m + 1.0))
    }

    /// `Y (1+t)^a e^{-Ct/(1+t)} / Y0`; the lemma asks for this to stay at most 2.
    pub fn envelope_ratio(&self, t: f64, y: f64) -> f64 {
        let s = 1.0 + t;
        y * s.powf(self.a) * (-self.c * t / s).exp() / self.y0
    }
}

/// Accepted steps of one saturated trajectory.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OdeRun {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    /// True iff `Y(t) <= 2 e^{Ct/(1+t)} Y0/(1+t)^a` at every accepted step up to `t_end`.
    pub verdict: bool,
    pub max_ratio: f64,
    /// Envelope ratio at the last accepted time.
    pub final_ratio: f64,
    pub t_reached: f64,
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// Differences between the fifth- and fourth-order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Integrates the saturated inequality with Dormand-Prince 5(4) and checks the bound.
///
/// Stops early (verdict false) as soon as the bound fails. A step collapse below
/// `1e-12 t_end` is reported as [`Error::Stiffness`].
pub fn ode_lemma_run(p: &OdeParams, t_end: f64) -> Result<OdeRun> {
    p.validate()?;
    if !(t_end > 0.0) || !t_end.is_finite() {
        return Err(Error::InvalidParams("t_end must be positive".into()));
    }
    if p.y0 == 0.0 {
        return Ok(OdeRun {
            times: vec![0.0, t_end],
            values: vec![0.0, 0.0],
            verdict: true,
            max_ratio: 0.0,
            final_ratio: 0.0,
            t_reached: t_end,
        });
    }
    let f = |t: f64, y: f64| p.rhs(t, y);
    let mut t = 0.0;
    let mut y = p.y0;
    let mut h = (1e-3 * t_end).min(1e-2);
    let mut times = vec![0.0];
    let mut values = vec![y];
    let mut max_ratio: f64 = 1.0;
    let mut final_ratio = 1.0;
    let mut k1 = f(t, y);
    while t < t_end {
        if t + h > t_end {
            h = t_end - t;
        }
        let k2 = f(t + C2 * h, y + h * A21 * k1);
        let k3 = f(t + C3 * h, y + h * (A31 * k1 + A32 * k2));
        let k4 = f(t + C4 * h, y + h * (A41 * k1 + A42 * k2 + A43 * k3));
        let k5 = f(t + C5 * h, y + h * (A51 * k1 + A52 * k2 + A53 * k3 + A54 * k4));
        let k6 = f(t + h, y + h * (A61 * k1 + A62 * k2 + A63 * k3 + A64 * k4 + A65 * k5));
        let y_new = y + h * (B1 * k1 + B3 * k3 + B4 * k4 + B5 * k5 + B6 * k6);
        let k7 = f(t + h, y_new);
        let err = h * (E1 * k1 + E3 * k3 + E4 * k4 + E5 * k5 + E6 * k6 + E7 * k7);
        let scale = ODE_RTOL * y.abs().max(y_new.abs()) + f64::MIN_POSITIVE;
        let e = if y_new.is_finite() { (err / scale).abs() } else { f64::INFINITY };
        if e <= 1.0 {
            t = if t + h >= t_end { t_end } else { t + h };
            y = y_new;
            k1 = k7;
            times.push(t);
            values.push(y);
            let r = p.envelope_ratio(t, y);
            final_ratio = r;
            max_ratio = max_ratio.max(r);
            if r > 2.0 {
                return Ok(OdeRun {
                    times,
                    values,
                    verdict: false,
                    max_ratio,
                    final_ratio,
                    t_reached: t,
                });
            }
        }
        let grow = if e == 0.0 { 5.0 } else { (0.9 * e.powf(-0.2)).clamp(0.2, 5.0) };
        h *= if e <= 1.0 { grow } else { grow.min(1.0) };
        if t < t_end && h < STEP_FLOOR * t_end {
            return Err(Error::Stiffness { t, step: h });
        }
    }
    Ok(OdeRun {
        times,
        values,
        verdict: true,
        max_ratio,
        final_ratio,
        t_reached: t_end,
    })
}

fn verdict(p: &OdeParams, y0: f64, t_end: f64) -> Result<bool> {
    match ode_lemma_run(&p.with_y0(y0), t_end) {
        Ok(run) => Ok(run.verdict),
        Err(Error::Stiffness { .. }) => Ok(false),
        Err(e) => Err(e),
    }
}

/// Largest `Y0` (to relative precision `rel`) whose saturated trajectory keeps the bound
/// up to `t_end`, by geometric bisection.
pub fn bisect_threshold(p: &OdeParams, t_end: f64, rel: f64) -> Result<f64> {
    p.validate()?;
    if p.c == 0.0 {
        return Err(Error::Domain("the linear equation has no threshold".into()));
    }
    let (mut lo, mut hi) = (1.0, 1.0);
    if verdict(p, 1.0, t_end)? {
        while verdict(p, hi, t_end)? {
            lo = hi;
            hi *= 10.0;
            if hi > 1e12 {
                return Err(Error::Domain("no failing initial value below 1e12".into()));
            }
        }
    } else {
        while !verdict(p, lo, t_end)? {
            hi = lo;
            lo /= 10.0;
            if lo < 1e-200 {
                return Err(Error::Domain("no passing initial value above 1e-200".into()));
            }
        }
    }
    while hi / lo > 1.0 + rel {
        let mid = (lo * hi).sqrt();
        if verdict(p, mid, t_end)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

use serde::Serialize;

use crate::error::{Error, Result};
use crate::evolve::Record;

use super::exponents::DecayExponents;

/// Minimum number of samples inside a fit window.
pub const MIN_FIT_SAMPLES: usize = 10;

/// `X_sigma(t)` for several orders on a common, strictly increasing time axis.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NormSeries {
    times: Vec<f64>,
    exponents: Vec<DecayExponents>,
    /// `values[i][n] = X_{sigma_i}(t_n)`.
    values: Vec<Vec<f64>>,
}

impl NormSeries {
    pub fn new(times: Vec<f64>, exponents: Vec<DecayExponents>, values: Vec<Vec<f64>>) -> Result<Self> {
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Domain("times must be strictly increasing".into()));
        }
        if values.len() != exponents.len() || values.iter().any(|v| v.len() != times.len()) {
            return Err(Error::Domain("series shape mismatch".into()));
        }
        if values.iter().flatten().any(|x| !(*x >= 0.0) || !x.is_finite()) {
            return Err(Error::Domain("norm values must be finite and nonnegative".into()));
        }
        Ok(Self { times, exponents, values })
    }

    /// Collects the tracked norms of a trajectory.
    pub fn from_records(records: &[Record], d: usize, gamma: f64, sigmas: &[f64]) -> Result<Self> {
        let exponents = sigmas
            .iter()
            .map(|&s| DecayExponents::new(d, gamma, s))
            .collect::<Result<Vec<_>>>()?;
        let times = records.iter().map(|r| r.t).collect();
        let values = (0..sigmas.len())
            .map(|i| records.iter().map(|r| r.norms[i]).collect())
            .collect();
        Self::new(times, exponents, values)
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn exponents(&self) -> &[DecayExponents] {
        &self.exponents
    }

    pub fn values(&self, i: usize) -> &[f64] {
        &self.values[i]
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// `Y_sigma = (1+t)^{c_dgs - a} X_sigma`.
    pub fn weighted(&self, i: usize) -> Vec<f64> {
        let e = &self.exponents[i];
        self.scaled(i, e.c_dgs - e.a)
    }

    /// `(1+t)^{c_dgs} X_sigma`, bounded when the predicted decay holds.
    pub fn plain_weighted(&self, i: usize) -> Vec<f64> {
        self.scaled(i, self.exponents[i].c_dgs)
    }

    fn scaled(&self, i: usize, p: f64) -> Vec<f64> {
        self.times
            .iter()
            .zip(&self.values[i])
            .map(|(t, x)| (1.0 + t).powf(p) * x)
            .collect()
    }
}

/// Least-squares power law `X ~ (1+t)^slope`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DecayFit {
    pub slope: f64,
    pub intercept: f64,
    /// Two standard errors of the slope.
    pub width: f64,
    pub samples: usize,
    pub window: (f64, f64),
}

/// Fits `log X` against `log(1+t)` over samples with `t` in `[window.0, window.1]`.
pub fn fit_power_law(times: &[f64], values: &[f64], window: (f64, f64)) -> Result<DecayFit> {
    if times.len() != values.len() {
        return Err(Error::Domain("times and values differ in length".into()));
    }
    if !(window.0 >= 1.0) || !(window.1 > window.0) {
        return Err(Error::Domain(format!(
            "fit window [{}, {}] must start at t >= 1",
            window.0, window.1
        )));
    }
    let pts: Vec<(f64, f64)> = times
        .iter()
        .zip(values)
        .filter(|(t, _)| **t >= window.0 && **t <= window.1)
        .map(|(t, x)| ((1.0 + t).ln(), *x))
        .collect();
    if pts.len() < MIN_FIT_SAMPLES {
        return Err(Error::InsufficientWindow {
            found: pts.len(),
            needed: MIN_FIT_SAMPLES,
        });
    }
    if pts.iter().any(|(_, x)| !(*x > 0.0)) {
        return Err(Error::Domain("power-law fit needs positive values".into()));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1.ln()).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1.ln() - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = pts
        .iter()
        .map(|p| (p.1.ln() - intercept - slope * p.0).powi(2))
        .sum();
    let width = 2.0 * (rss / (n - 2.0) / sxx).sqrt();
    Ok(DecayFit {
        slope,
        intercept,
        width,
        samples: pts.len(),
        window,
    })
}

/// Slope of `X_{sigma_i}` over `window`.
pub fn decay_fit(series: &NormSeries, i: usize, window: (f64, f64)) -> Result<DecayFit> {
    if i >= series.exponents.len() {
        return Err(Error::Domain(format!("no tracked order with index {i}")));
    }
    fit_power_law(&series.times, &series.values[i], window)
}

/// Outcome of the weighted-boundedness check.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BoundCheck {
    pub reference_time: f64,
    pub reference_value: f64,
    /// `max_t w(t) / w(t_ref)`.
    pub max_ratio: f64,
    pub factor: f64,
    pub pass: bool,
}

/// Checks `w(t) <= factor * w(t_ref)` for every sample of `weighted`.
pub fn bounded_by_reference(times: &[f64], weighted: &[f64], t_ref: f64, factor: f64) -> Result<BoundCheck> {
    let idx = times
        .iter()
        .position(|t| (t - t_ref).abs() <= 1e-9 * t_ref.abs().max(1.0))
        .ok_or_else(|| Error::Domain(format!("reference time {t_ref} is not a sample")))?;
    let r = weighted[idx];
    let peak = weighted.iter().copied().fold(0.0, f64::max);
    let max_ratio = if r > 0.0 {
        peak / r
    } else if peak == 0.0 {
        0.0
    } else {
        f64::INFINITY
    };
    Ok(BoundCheck {
        reference_time: times[idx],
        reference_value: r,
        max_ratio,
        factor,
        pass: max_ratio <= factor,
    })
}

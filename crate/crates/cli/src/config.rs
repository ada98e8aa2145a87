//! Experiment configuration: a TOML file with nested sections that converts into
//! the core [`RunConfig`].

use std::path::{Path, PathBuf};

use eulerlab_core::burgers::{BumpTerm, BurgersRef, Perturbation};
use eulerlab_core::coupling::PhysParams;
use eulerlab_core::diagnostics::EnsembleSpec;
use eulerlab_core::evolve::{InitialData, RunConfig, StepControl, DEFAULT_DELTA};
use eulerlab_core::linalg::Mat;
use eulerlab_core::spectral::Grid;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub dim: usize,
    pub n: usize,
    pub length: f64,
}

/// `v0 = linear x + sum of bumps`. An absent linear part means the identity.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReferenceSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub linear: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub bumps: Vec<BumpTerm>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSpec {
    pub sobolev_index: f64,
    pub t_end: f64,
    pub output_dt: f64,
    pub sigmas: Vec<f64>,
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default)]
    pub allow_unsafe: bool,
    #[serde(default)]
    pub step: StepControl,
    #[serde(default)]
    pub initial: InitialData,
}

fn default_delta() -> f64 {
    DEFAULT_DELTA
}

/// Axes of a parameter sweep; empty axes keep the base value.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepAxes {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub gamma: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub delta: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub n: Vec<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub dt: Vec<f64>,
}

impl SweepAxes {
    pub fn is_empty(&self) -> bool {
        self.gamma.is_empty() && self.delta.is_empty() && self.n.is_empty() && self.dt.is_empty()
    }
}

/// Reference-flow diagnostics for the `burgers` subcommand.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BurgersSpec {
    /// Sample times; logarithmically spaced from `t_start` to `t_end` when empty.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub times: Vec<f64>,
    #[serde(default = "one")]
    pub t_start: f64,
    #[serde(default = "thirty")]
    pub t_end: f64,
    #[serde(default = "thirty_samples")]
    pub samples: usize,
    pub sigmas: Vec<f64>,
    /// Regularity of the reference, bounding the orders from above by `s - 1`.
    pub sobolev_index: f64,
}

fn one() -> f64 {
    1.0
}

fn thirty() -> f64 {
    30.0
}

fn thirty_samples() -> usize {
    30
}

impl BurgersSpec {
    pub fn sample_times(&self) -> CliResult<Vec<f64>> {
        if !self.times.is_empty() {
            return Ok(self.times.clone());
        }
        if !(self.t_start > 0.0 && self.t_end > self.t_start) || self.samples < 2 {
            return Err(CliError::Config("burgers times need 0 < t_start < t_end and 2+ samples".into()));
        }
        let r = (self.t_end / self.t_start).ln();
        let last = (self.samples - 1) as f64;
        Ok((0..self.samples)
            .map(|i| {
                if i + 1 == self.samples {
                    self.t_end
                } else {
                    self.t_start * (r * i as f64 / last).exp()
                }
            })
            .collect())
    }
}

/// Report toggles: fit windows, the bound check and inequality suites.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportSpec {
    #[serde(default = "one")]
    pub bound_reference: f64,
    #[serde(default = "three")]
    pub bound_factor: f64,
    #[serde(default)]
    pub fit_windows: Vec<(f64, f64)>,
    /// Resolutions used by `ineq-test`; each suite runs at every one.
    #[serde(default = "ineq_sizes")]
    pub ineq_n: Vec<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub ineq: Vec<EnsembleSpec>,
}

fn three() -> f64 {
    3.0
}

fn ineq_sizes() -> Vec<usize> {
    vec![64, 128]
}

impl Default for ReportSpec {
    fn default() -> Self {
        Self {
            bound_reference: 1.0,
            bound_factor: 3.0,
            fit_windows: Vec::new(),
            ineq_n: ineq_sizes(),
            ineq: Vec::new(),
        }
    }
}

/// A complete experiment. Scalars precede tables so the TOML echo is valid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_out")]
    pub out_dir: PathBuf,
    pub grid: GridSpec,
    pub physics: PhysParams,
    #[serde(default)]
    pub reference: ReferenceSpec,
    pub run: RunSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub burgers: Option<BurgersSpec>,
    #[serde(default, skip_serializing_if = "SweepAxes::is_empty")]
    pub sweep: SweepAxes,
    #[serde(default)]
    pub report: ReportSpec,
}

fn default_out() -> PathBuf {
    PathBuf::from("out")
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> CliResult<Self> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> CliResult<String> {
        toml::to_string(self).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn reference(&self) -> CliResult<BurgersRef> {
        let d = self.grid.dim;
        let linear = match &self.reference.linear {
            None => Mat::identity(d),
            Some(rows) => {
                if rows.len() != d || rows.iter().any(|r| r.len() != d) {
                    return Err(CliError::Config(format!("reference.linear must be {d}x{d}")));
                }
                let refs: Vec<&[f64]> = rows.iter().map(|r| r.as_slice()).collect();
                Mat::from_rows(&refs)
            }
        };
        let pert = if self.reference.bumps.is_empty() {
            Perturbation::Zero
        } else {
            Perturbation::Bumps(self.reference.bumps.clone())
        };
        Ok(BurgersRef::new(linear, pert)?)
    }

    pub fn grid(&self) -> CliResult<Grid> {
        Ok(Grid::new(self.grid.dim, self.grid.n, self.grid.length)?)
    }

    /// The core run description. Structural errors map to [`CliError::Config`].
    pub fn run_config(&self) -> CliResult<RunConfig> {
        let cfg = RunConfig {
            grid: self.grid()?,
            params: self.physics,
            reference: self.reference()?,
            sobolev_index: self.run.sobolev_index,
            t_end: self.run.t_end,
            step: self.run.step,
            output_dt: self.run.output_dt,
            sigmas: self.run.sigmas.clone(),
            delta: self.run.delta,
            initial: self.run.initial.clone(),
            allow_unsafe: self.run.allow_unsafe,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets::{preset, PRESET_NAMES};

    #[test]
    fn presets_round_trip() {
        for name in PRESET_NAMES {
            let c = preset(name).unwrap();
            let text = c.to_toml().unwrap();
            assert_eq!(ExperimentConfig::from_toml(&text).unwrap(), c, "{name}");
        }
    }

    #[test]
    fn unknown_keys_rejected() {
        let mut text = preset("euler-1d-baseline").unwrap().to_toml().unwrap();
        text = text.replace("[physics]", "[physics]\nbogus = 1");
        assert!(matches!(ExperimentConfig::from_toml(&text), Err(CliError::Config(_))));
    }

    #[test]
    fn full_precision_floats() {
        let mut c = preset("euler-1d-baseline").unwrap();
        c.run.delta = 0.1 + 0.2;
        let back = ExperimentConfig::from_toml(&c.to_toml().unwrap()).unwrap();
        assert_eq!(back.run.delta.to_bits(), (0.1f64 + 0.2).to_bits());
    }

    #[test]
    fn log_times() {
        let b = BurgersSpec {
            times: vec![],
            t_start: 1.0,
            t_end: 30.0,
            samples: 30,
            sigmas: vec![0.5],
            sobolev_index: 3.0,
        };
        let t = b.sample_times().unwrap();
        assert_eq!(t.len(), 30);
        assert_eq!((t[0], t[29]), (1.0, 30.0));
        assert!(t.windows(2).all(|w| w[1] > w[0]));
    }
}

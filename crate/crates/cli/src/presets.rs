//! Named experiment configurations.

use std::path::PathBuf;

use eulerlab_core::burgers::BumpTerm;
use eulerlab_core::coupling::PhysParams;
use eulerlab_core::diagnostics::{EnsembleSpec, IneqKind};
use eulerlab_core::evolve::{InitialData, Profile, StepControl, VelocityKind};

use crate::config::{BurgersSpec, ExperimentConfig, GridSpec, ReferenceSpec, ReportSpec, RunSpec, SweepAxes};
use crate::error::{CliError, CliResult};

pub const PRESET_NAMES: [&str; 7] = [
    "euler-1d-baseline",
    "burgers-1d-bump",
    "decay-euler-1d",
    "decay-helmholtz-2d",
    "decay-poisson-3d",
    "ineq-suite",
    "convergence-1d",
];

fn initial(width: f64) -> InitialData {
    InitialData {
        profile: Profile::Gaussian { width },
        velocity: VelocityKind::Gradient,
        ..InitialData::default()
    }
}

fn base(name: &str, dim: usize, n: usize, length: f64, physics: PhysParams, run: RunSpec) -> ExperimentConfig {
    ExperimentConfig {
        preset: Some(name.to_string()),
        seed: 0,
        out_dir: PathBuf::from("out").join(name),
        grid: GridSpec { dim, n, length },
        physics,
        reference: ReferenceSpec::default(),
        run,
        burgers: None,
        sweep: SweepAxes::default(),
        report: ReportSpec::default(),
    }
}

fn run_spec(s: f64, t_end: f64, sigmas: Vec<f64>, width: f64) -> RunSpec {
    RunSpec {
        sobolev_index: s,
        t_end,
        output_dt: 0.25,
        sigmas,
        delta: 1e-2,
        allow_unsafe: false,
        step: StepControl::default(),
        initial: initial(width),
    }
}

fn euler(gamma: f64) -> PhysParams {
    PhysParams::euler(gamma).expect("valid preset physics")
}

fn coupled(gamma: f64, kappa: f64, mu: f64) -> PhysParams {
    PhysParams::new(gamma, 1.0, kappa, mu, 1.0).expect("valid preset physics")
}

pub fn preset(name: &str) -> CliResult<ExperimentConfig> {
    let cfg = match name {
        "euler-1d-baseline" => {
            let mut c = base(name, 1, 512, 100.0, euler(2.0), run_spec(2.6, 5.0, vec![0.0, 1.0, 2.6], 1.0));
            c.report.fit_windows = vec![(1.0, 5.0)];
            c
        }
        "burgers-1d-bump" => {
            let mut c = base(name, 1, 1024, 200.0, euler(2.0), run_spec(2.6, 5.0, vec![0.0, 2.6], 1.0));
            c.reference.bumps = vec![BumpTerm {
                amplitude: 0.3,
                center: [0.0; 3],
                radius: 2.5,
                direction: [1.0, 0.0, 0.0],
            }];
            c.burgers = Some(BurgersSpec {
                times: Vec::new(),
                t_start: 1.0,
                t_end: 30.0,
                samples: 30,
                sigmas: vec![0.5, 1.0, 1.5],
                sobolev_index: 3.0,
            });
            c
        }
        "decay-euler-1d" => {
            let mut c = base(name, 1, 2048, 360.0, euler(2.0), run_spec(2.6, 25.0, vec![0.0, 1.0, 2.6], 1.0));
            c.report.fit_windows = vec![(1.0, 25.0), (5.0, 25.0)];
            c
        }
        "decay-helmholtz-2d" => {
            let mut c = base(name, 2, 256, 80.0, coupled(2.0, 1.0, 1.0), run_spec(2.4, 6.0, vec![0.0, 2.4], 1.0));
            c.report.fit_windows = vec![(1.0, 6.0)];
            c
        }
        "decay-poisson-3d" => {
            let mut c = base(name, 3, 96, 48.0, coupled(1.4, 1.0, 0.0), run_spec(2.6, 8.0, vec![0.0, 2.6], 1.5));
            c.report.fit_windows = vec![(1.0, 8.0)];
            c
        }
        "ineq-suite" => {
            let mut c = base(name, 1, 64, 2.0 * std::f64::consts::PI, euler(2.0), run_spec(2.6, 1.0, vec![0.0], 0.5));
            let suite = |kind| EnsembleSpec {
                kind,
                members: 200,
                modes: 8,
                decay: 1.0,
                root_seed: 0,
            };
            c.report.ineq_n = vec![64, 128];
            c.report.ineq = vec![
                suite(IneqKind::Com1 { s: 1.5 }),
                suite(IneqKind::Com2 { s: 1.5 }),
                suite(IneqKind::Com2 { s: 2.5 }),
                suite(IneqKind::Compo { sigma: 1.0, alpha: 2.0 }),
            ];
            c
        }
        "convergence-1d" => base(name, 1, 512, 60.0, euler(2.0), run_spec(2.6, 2.0, vec![0.0, 1.0, 2.6], 1.0)),
        other => {
            return Err(CliError::Config(format!(
                "unknown preset '{other}' (known: {})",
                PRESET_NAMES.join(", ")
            )))
        }
    };
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_preset_builds_a_valid_run() {
        for name in PRESET_NAMES {
            let c = preset(name).unwrap();
            c.run_config().unwrap();
            assert_eq!(c.preset.as_deref(), Some(name));
        }
        assert!(preset("nope").is_err());
    }
}

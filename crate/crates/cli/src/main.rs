use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use eulerlab::artifacts::write_json;
use eulerlab::experiment::{
    burgers_experiment, fit_stored, ineq_experiment, ode_experiment, run_experiment, sweep_experiment,
};
use eulerlab::{preset, CliError, CliResult, ExperimentConfig, EXIT_OK, PRESET_NAMES};
use eulerlab_core::diagnostics::OdeParams;
use serde_json::json;

#[derive(Parser)]
#[command(name = "eulerlab", version, about = "Pseudo-spectral decay experiments for Euler-Poisson/Helmholtz flows")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// TOML experiment file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Named preset; ignored when --config is given.
    #[arg(long, global = true)]
    preset: Option<String>,
    /// Root seed (overrides the file).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Artifact directory (overrides the file).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Run outside the admissible parameter range.
    #[arg(long = "unsafe", global = true)]
    allow_unsafe: bool,
    /// Worker threads for sweeps and ensembles (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate one trajectory.
    Run,
    /// Reference-flow diagnostics only.
    Burgers,
    /// Saturated bootstrap inequality.
    OdeLemma {
        #[arg(long)]
        a: f64,
        #[arg(long)]
        m: f64,
        #[arg(long = "m-prime")]
        m_prime: f64,
        #[arg(long)]
        c: f64,
        #[arg(long, default_value_t = 1e-3)]
        y0: f64,
        #[arg(long = "t-end", default_value_t = 1e3)]
        t_end: f64,
        /// Also bisect the largest passing initial value.
        #[arg(long)]
        bisect: bool,
    },
    /// Commutator and composition ensembles.
    IneqTest,
    /// Cartesian sweep over the configured axes.
    Sweep,
    /// Refit a stored series.csv.
    Fit {
        #[arg(long)]
        csv: PathBuf,
        #[arg(long)]
        from: f64,
        #[arg(long)]
        to: f64,
        #[arg(long)]
        dim: Option<usize>,
        #[arg(long)]
        gamma: Option<f64>,
    },
    /// List preset names.
    Presets,
}

fn load(common: &Common) -> CliResult<ExperimentConfig> {
    let mut cfg = match (&common.config, &common.preset) {
        (Some(path), _) => ExperimentConfig::load(path)?,
        (None, Some(name)) => preset(name)?,
        (None, None) => return Err(CliError::Config("pass --config PATH or --preset NAME".into())),
    };
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    if let Some(o) = &common.out {
        cfg.out_dir = o.clone();
    }
    if common.allow_unsafe {
        cfg.run.allow_unsafe = true;
    }
    Ok(cfg)
}

fn print(v: &serde_json::Value) {
    println!("{}", serde_json::to_string_pretty(v).unwrap_or_default());
}

fn dispatch(cli: &Cli) -> CliResult<i32> {
    let common = &cli.common;
    match &cli.command {
        Command::Run => {
            let cfg = load(common)?;
            let o = run_experiment(&cfg, &cfg.out_dir)?;
            eprintln!("artifacts in {}", o.out_dir.display());
            print(&json!({"exit_code": o.exit_code, "status": o.report["status"], "reason": o.report["reason"], "stop": o.report["stop"]}));
            Ok(o.exit_code)
        }
        Command::Burgers => {
            let cfg = load(common)?;
            let (_, report) = burgers_experiment(&cfg, &cfg.out_dir)?;
            print(&report);
            Ok(EXIT_OK)
        }
        Command::OdeLemma { a, m, m_prime, c, y0, t_end, bisect } => {
            let p = OdeParams::new(*a, *m, *m_prime, *c, *y0)?;
            let report = ode_experiment(&p, *t_end, *bisect)?;
            if let Some(out) = &common.out {
                std::fs::create_dir_all(out)?;
                write_json(&out.join("ode.json"), &report)?;
            }
            print(&report);
            Ok(EXIT_OK)
        }
        Command::IneqTest => {
            let cfg = match (&common.config, &common.preset) {
                (None, None) => {
                    let mut c = preset("ineq-suite")?;
                    if let Some(o) = &common.out {
                        c.out_dir = o.clone();
                    }
                    c
                }
                _ => load(common)?,
            };
            let report = ineq_experiment(&cfg, common.seed, &cfg.out_dir)?;
            print(&report);
            Ok(EXIT_OK)
        }
        Command::Sweep => {
            let cfg = load(common)?;
            let outcomes = sweep_experiment(&cfg, &cfg.out_dir)?;
            let worst = outcomes.iter().map(|o| o.exit_code).max().unwrap_or(EXIT_OK);
            print(&json!({"runs": outcomes.len(), "exit_codes": outcomes.iter().map(|o| o.exit_code).collect::<Vec<_>>()}));
            Ok(worst)
        }
        Command::Fit { csv, from, to, dim, gamma } => {
            print(&fit_stored(csv, (*from, *to), *dim, *gamma)?);
            Ok(EXIT_OK)
        }
        Command::Presets => {
            for name in PRESET_NAMES {
                println!("{name}");
            }
            Ok(EXIT_OK)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.common.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("cannot configure {n} threads: {e}");
            return ExitCode::from(eulerlab::EXIT_CONFIG as u8);
        }
    }
    match dispatch(&cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("{e}");
            print(&json!({"exit_code": e.exit_code(), "status": e.kind(), "reason": e.to_string()}));
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

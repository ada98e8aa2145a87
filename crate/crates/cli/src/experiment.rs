//! Orchestration behind the subcommands.

use std::fs;
use std::path::{Path, PathBuf};

use eulerlab_core::burgers::{check_h0, k_decay_series, KDecayRow};
use eulerlab_core::diagnostics::{
    bisect_threshold, bounded_by_reference, decay_exponents, decay_fit, ensemble_member, fit_power_law,
    ineq_ratio, mass_is_finite_claim, ode_lemma_run, EnsembleSpec, EnsembleStats, IneqKind, NormSeries, OdeParams,
};
use eulerlab_core::diagnostics::ineq::{derive_seed, random_band_limited};
use eulerlab_core::evolve::{admissibility_check, integrate, StepControl, StopReason, Trajectory};
use eulerlab_core::spectral::Grid;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::artifacts::{
    read_series_csv, series_csv, sha256_hex, write_json, write_plot_bundle, CONFIG_ECHO, REPORT_JSON, SERIES_CSV,
};
use crate::config::ExperimentConfig;
use crate::error::{CliError, CliResult, EXIT_OK};

/// Relative mass drift accepted as conservation.
pub const MASS_TOL: f64 = 1e-6;

/// Result of one `run`.
#[derive(Debug)]
pub struct RunOutcome {
    pub exit_code: i32,
    pub out_dir: PathBuf,
    pub report: Value,
    pub csv_sha256: Option<String>,
    pub trajectory: Option<Trajectory>,
    pub series: Option<NormSeries>,
}

fn stop_json(stop: &StopReason) -> Value {
    match stop {
        StopReason::Completed => json!({"kind": "completed"}),
        StopReason::HorizonGuard { t } => json!({"kind": "horizon_guard", "t": t}),
        StopReason::Failed { t, error } => json!({"kind": "failed", "t": t, "error": error.to_string()}),
    }
}

fn failure_report(cfg: &ExperimentConfig, e: &CliError) -> Value {
    let reason = match e {
        CliError::Inadmissible(v) => v.first().cloned().unwrap_or_default(),
        other => other.to_string(),
    };
    let violations = match e {
        CliError::Inadmissible(v) => v.clone(),
        _ => Vec::new(),
    };
    json!({
        "preset": cfg.preset,
        "seed": cfg.seed,
        "exit_code": e.exit_code(),
        "status": e.kind(),
        "reason": reason,
        "violations": violations,
    })
}

/// Largest relative deviation of the recorded mass from its initial value.
pub fn mass_drift(tr: &Trajectory) -> f64 {
    let m0 = match tr.records.first() {
        Some(r) => r.mass,
        None => return 0.0,
    };
    let scale = if m0 != 0.0 { m0.abs() } else { 1.0 };
    tr.records
        .iter()
        .map(|r| (r.mass - m0).abs() / scale)
        .fold(0.0, f64::max)
}

/// Runs one trajectory and writes the artifact directory `out`.
///
/// Errors are folded into the report and the exit code; only I/O failures escape.
pub fn run_experiment(cfg: &ExperimentConfig, out: &Path) -> CliResult<RunOutcome> {
    fs::create_dir_all(out)?;
    let mut echo = cfg.clone();
    echo.out_dir = out.to_path_buf();
    fs::write(out.join(CONFIG_ECHO), echo.to_toml()?)?;
    match simulate(cfg, out) {
        Ok(o) => Ok(o),
        Err(CliError::Io(e)) => Err(CliError::Io(e)),
        Err(e) => {
            let report = failure_report(cfg, &e);
            write_json(&out.join(REPORT_JSON), &report)?;
            Ok(RunOutcome {
                exit_code: e.exit_code(),
                out_dir: out.to_path_buf(),
                report,
                csv_sha256: None,
                trajectory: None,
                series: None,
            })
        }
    }
}

fn simulate(cfg: &ExperimentConfig, out: &Path) -> CliResult<RunOutcome> {
    let run = cfg.run_config()?;
    let d = run.grid.dim();
    let p = run.params;
    let adm = admissibility_check(d, p.gamma, run.sobolev_index, p.kappa, p.mu)?;
    if !adm.admissible && !run.allow_unsafe {
        return Err(CliError::Inadmissible(adm.violations));
    }
    let epsilon = check_h0(&run.reference, &run.grid)?;
    let tr = integrate(&run)?;
    let series = NormSeries::from_records(&tr.records, d, p.gamma, &run.sigmas)?;
    let csv = series_csv(&tr.records, &series, &run.sigmas)?;
    let sha = sha256_hex(&csv);
    fs::write(out.join(SERIES_CSV), &csv)?;
    write_plot_bundle(out, &tr.records, &series, &run.sigmas)?;

    let times = series.times();
    let bounded: Vec<Value> = run
        .sigmas
        .iter()
        .enumerate()
        .map(|(i, s)| {
            match bounded_by_reference(times, &series.plain_weighted(i), cfg.report.bound_reference, cfg.report.bound_factor) {
                Ok(b) => json!({"sigma": s, "check": b}),
                Err(e) => json!({"sigma": s, "error": e.to_string()}),
            }
        })
        .collect();
    let mut fits = Vec::new();
    for &(a, b) in &cfg.report.fit_windows {
        for (i, s) in run.sigmas.iter().enumerate() {
            let predicted = series.exponents()[i].predicted_slope();
            fits.push(match decay_fit(&series, i, (a, b)) {
                Ok(f) => json!({"sigma": s, "window": [a, b], "fit": f, "predicted_slope": predicted}),
                Err(e) => json!({"sigma": s, "window": [a, b], "error": e.to_string(), "predicted_slope": predicted}),
            });
        }
    }
    let drift = mass_drift(&tr);
    let (exit_code, status, reason) = match &tr.stop {
        StopReason::Failed { error, .. } => (crate::error::EXIT_NUMERICAL, "numerical_failure", Some(error.to_string())),
        _ => (EXIT_OK, "ok", None),
    };
    let t_final = tr.records.last().map_or(0.0, |r| r.t);
    let report = json!({
        "preset": cfg.preset,
        "seed": cfg.seed,
        "exit_code": exit_code,
        "status": status,
        "reason": reason,
        "grid": cfg.grid,
        "physics": p,
        "g_tilde": p.g_tilde(),
        "sobolev_index": run.sobolev_index,
        "delta": run.delta,
        "admissibility": adm,
        "h0_margin": epsilon,
        "exponents": series.exponents(),
        "stop": stop_json(&tr.stop),
        "t_final": t_final,
        "dt": tr.dt,
        "steps": tr.steps,
        "steps_per_output": tr.steps_per_output,
        "guard_threshold": tr.guard_threshold,
        "initial_hs_norm": tr.initial_hs_norm,
        "clamp_events": tr.clamp_events,
        "verdicts": {
            "bounded": bounded,
            "horizon_reached": tr.stop == StopReason::Completed,
            "mass": {
                "relative_drift": drift,
                "conserved": drift <= MASS_TOL,
                "finite_mass_claim": mass_is_finite_claim(&p),
            },
        },
        "fits": fits,
        "csv_sha256": sha,
    });
    write_json(&out.join(REPORT_JSON), &report)?;
    Ok(RunOutcome {
        exit_code,
        out_dir: out.to_path_buf(),
        report,
        csv_sha256: Some(sha),
        trajectory: Some(tr),
        series: Some(series),
    })
}

/// Reference-flow diagnostics: the `burgers` subcommand.
pub fn burgers_experiment(cfg: &ExperimentConfig, out: &Path) -> CliResult<(Vec<KDecayRow>, Value)> {
    let spec = cfg
        .burgers
        .as_ref()
        .ok_or_else(|| CliError::Config("missing [burgers] section".into()))?;
    let grid = cfg.grid()?;
    let reference = cfg.reference()?;
    let epsilon = check_h0(&reference, &grid)?;
    let times = spec.sample_times()?;
    let rows = k_decay_series(&reference, &grid, &times, &spec.sigmas, spec.sobolev_index)?;
    let residual = [0.0, 1.0, 5.0, 20.0]
        .iter()
        .map(|&t| eulerlab_core::burgers::eval_burgers(&reference, t, &grid).map(|e| e.identity_residual))
        .collect::<Result<Vec<_>, _>>()?
        .into_iter()
        .fold(0.0, f64::max);

    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["t".to_string(), "d2v_max".into(), "k_sup".into()];
    header.extend(spec.sigmas.iter().map(|s| format!("k_sigma_{s}")));
    w.write_record(&header).map_err(|e| CliError::Io(std::io::Error::other(e)))?;
    for r in &rows {
        let mut rec = vec![r.t.to_string(), r.d2v_maxnorm.to_string(), r.k_sup.to_string()];
        rec.extend(r.k_norms.iter().map(|x| x.to_string()));
        w.write_record(&rec).map_err(|e| CliError::Io(std::io::Error::other(e)))?;
    }
    let csv = w.into_inner().map_err(|e| CliError::Io(std::io::Error::other(e.to_string())))?;
    fs::create_dir_all(out)?;
    fs::write(out.join("burgers.csv"), &csv)?;

    let window = (times[0].max(1.0), *times.last().unwrap_or(&1.0));
    let d2: Vec<f64> = rows.iter().map(|r| r.d2v_maxnorm).collect();
    let d2_fit = fit_power_law(&times, &d2, window).map_err(CliError::from)?;
    let half_d = cfg.grid.dim as f64 / 2.0;
    let k_fits = spec
        .sigmas
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let k: Vec<f64> = rows.iter().map(|r| r.k_norms[i]).collect();
            fit_power_law(&times, &k, window).map(|f| json!({"sigma": s, "fit": f, "predicted_slope": half_d - s}))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let report = json!({
        "preset": cfg.preset,
        "h0_margin": epsilon,
        "d2v_fit": d2_fit,
        "d2v_predicted_slope": -3.0,
        "k_fits": k_fits,
        "identity_residual_max": residual,
        "csv_sha256": sha256_hex(&csv),
    });
    write_json(&out.join("burgers.json"), &report)?;
    Ok((rows, report))
}

/// Bound check and optional threshold search for the ODE lemma.
pub fn ode_experiment(p: &OdeParams, t_end: f64, bisect: bool) -> CliResult<Value> {
    let run = ode_lemma_run(p, t_end)?;
    let threshold = if bisect && p.c > 0.0 {
        Some(bisect_threshold(p, t_end, 1e-3)?)
    } else {
        None
    };
    Ok(json!({
        "params": p,
        "t_end": t_end,
        "verdict": run.verdict,
        "max_envelope_ratio": run.max_ratio,
        "final_envelope_ratio": run.final_ratio,
        "t_reached": run.t_reached,
        "accepted_steps": run.times.len() - 1,
        "threshold": threshold,
    }))
}

/// Ensemble statistics of one suite on a 1D grid of `n` points over `[-pi, pi)`.
pub fn ensemble_stats(spec: &EnsembleSpec, n: usize) -> CliResult<EnsembleStats> {
    if spec.members == 0 {
        return Err(CliError::Config("empty ensemble".into()));
    }
    let grid = Grid::new(1, n, 2.0 * std::f64::consts::PI)?;
    let ratios = (0..spec.members)
        .into_par_iter()
        .map(|i| ensemble_member(&grid, spec, i))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(EnsembleStats::from_ratios(&ratios))
}

/// Largest relative change of the com1 ratio under `u -> lambda u` and `v -> lambda v`.
pub fn com1_scale_defect(spec: &EnsembleSpec, n: usize, s: f64) -> CliResult<f64> {
    let grid = Grid::new(1, n, 2.0 * std::f64::consts::PI)?;
    let kind = IneqKind::Com1 { s };
    let mut worst: f64 = 0.0;
    for i in 0..spec.members.min(20) {
        let seed = derive_seed(spec.root_seed, i as u64);
        let v = random_band_limited(&grid, spec.modes, spec.decay, seed)?;
        let u = random_band_limited(&grid, spec.modes, spec.decay, seed ^ 0x5555)?;
        let r = ineq_ratio(kind, &v, &u)?;
        for lambda in [1e-3, 0.37, 25.0] {
            let ru = ineq_ratio(kind, &v, &u.scale(lambda)?)?;
            let rv = ineq_ratio(kind, &v.scale(lambda)?, &u)?;
            worst = worst.max((ru - r).abs() / r).max((rv - r).abs() / r);
        }
    }
    Ok(worst)
}

/// Runs every configured inequality suite at every resolution.
pub fn ineq_experiment(cfg: &ExperimentConfig, seed_override: Option<u64>, out: &Path) -> CliResult<Value> {
    if cfg.report.ineq.is_empty() {
        return Err(CliError::Config("no [[report.ineq]] suites configured".into()));
    }
    let mut suites = Vec::new();
    for spec in &cfg.report.ineq {
        let mut spec = *spec;
        if let Some(s) = seed_override {
            spec.root_seed = s;
        }
        spec.kind.validate()?;
        let stats = cfg
            .report
            .ineq_n
            .iter()
            .map(|&n| ensemble_stats(&spec, n).map(|s| json!({"n": n, "stats": s})))
            .collect::<CliResult<Vec<_>>>()?;
        let maxes: Vec<f64> = stats.iter().filter_map(|s| s["stats"]["max"].as_f64()).collect();
        let spread = match (maxes.iter().cloned().reduce(f64::max), maxes.iter().cloned().reduce(f64::min)) {
            (Some(hi), Some(lo)) if hi > 0.0 => (hi - lo) / hi,
            _ => 0.0,
        };
        let mut entry = json!({
            "spec": spec,
            "resolutions": stats,
            "max_relative_spread": spread,
            "finite": maxes.iter().all(|m| m.is_finite()),
        });
        if let IneqKind::Com1 { s } = spec.kind {
            entry["scale_defect"] = json!(com1_scale_defect(&spec, cfg.report.ineq_n[0], s)?);
        }
        suites.push(entry);
    }
    let report = json!({"preset": cfg.preset, "suites": suites});
    fs::create_dir_all(out)?;
    write_json(&out.join("ineq.json"), &report)?;
    Ok(report)
}

/// The configurations of a sweep, in a fixed order (gamma, delta, N, dt nested).
pub fn sweep_variants(cfg: &ExperimentConfig) -> Vec<ExperimentConfig> {
    fn axis<T: Copy>(v: &[T], base: T) -> Vec<T> {
        if v.is_empty() {
            vec![base]
        } else {
            v.to_vec()
        }
    }
    let base_dt = match cfg.run.step {
        StepControl::Fixed(dt) => Some(dt),
        StepControl::Cfl(_) => None,
    };
    let dts: Vec<Option<f64>> = if cfg.sweep.dt.is_empty() {
        vec![base_dt]
    } else {
        cfg.sweep.dt.iter().map(|&d| Some(d)).collect()
    };
    let mut out = Vec::new();
    for g in axis(&cfg.sweep.gamma, cfg.physics.gamma) {
        for delta in axis(&cfg.sweep.delta, cfg.run.delta) {
            for n in axis(&cfg.sweep.n, cfg.grid.n) {
                for dt in &dts {
                    let mut c = cfg.clone();
                    c.physics.gamma = g;
                    c.run.delta = delta;
                    c.grid.n = n;
                    if let Some(dt) = dt {
                        c.run.step = StepControl::Fixed(*dt);
                    }
                    c.sweep = Default::default();
                    out.push(c);
                }
            }
        }
    }
    out
}

/// Runs every sweep variant in its own subdirectory and writes `sweep.csv`.
pub fn sweep_experiment(cfg: &ExperimentConfig, out: &Path) -> CliResult<Vec<RunOutcome>> {
    let variants = sweep_variants(cfg);
    fs::create_dir_all(out)?;
    let outcomes = variants
        .par_iter()
        .enumerate()
        .map(|(i, c)| run_experiment(c, &out.join(format!("run_{i:03}"))))
        .collect::<CliResult<Vec<_>>>()?;
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| CliError::Io(std::io::Error::other(e));
    w.write_record(["index", "gamma", "delta", "n", "step", "exit_code", "stop", "t_final", "csv_sha256"])
        .map_err(io)?;
    for (i, (c, o)) in variants.iter().zip(&outcomes).enumerate() {
        let step = match c.run.step {
            StepControl::Cfl(f) => format!("cfl:{f}"),
            StepControl::Fixed(dt) => format!("dt:{dt}"),
        };
        w.write_record(&[
            i.to_string(),
            c.physics.gamma.to_string(),
            c.run.delta.to_string(),
            c.grid.n.to_string(),
            step,
            o.exit_code.to_string(),
            o.report["stop"]["kind"].as_str().unwrap_or(o.report["status"].as_str().unwrap_or("")).to_string(),
            o.report["t_final"].as_f64().map_or(String::new(), |t| t.to_string()),
            o.csv_sha256.clone().unwrap_or_default(),
        ])
        .map_err(io)?;
    }
    let csv = w.into_inner().map_err(|e| CliError::Io(std::io::Error::other(e.to_string())))?;
    fs::write(out.join("sweep.csv"), csv)?;
    Ok(outcomes)
}

/// Refits a stored `series.csv` over `window` for every order it holds.
pub fn fit_stored(csv: &Path, window: (f64, f64), dim: Option<usize>, gamma: Option<f64>) -> CliResult<Value> {
    let rows = read_series_csv(csv)?;
    let mut sigmas: Vec<f64> = Vec::new();
    for r in &rows {
        if !sigmas.iter().any(|s| s.to_bits() == r.sigma.to_bits()) {
            sigmas.push(r.sigma);
        }
    }
    let mut fits = Vec::new();
    for s in sigmas {
        let (t, x): (Vec<f64>, Vec<f64>) = rows
            .iter()
            .filter(|r| r.sigma.to_bits() == s.to_bits())
            .map(|r| (r.t, r.x_sigma))
            .unzip();
        let mut entry = match fit_power_law(&t, &x, window) {
            Ok(f) => json!({"sigma": s, "fit": f}),
            Err(e) => json!({"sigma": s, "error": e.to_string()}),
        };
        if let (Some(d), Some(g)) = (dim, gamma) {
            entry["predicted_slope"] = json!(decay_exponents(d, g, s)?.predicted_slope());
        }
        fits.push(entry);
    }
    Ok(json!({"source": csv.display().to_string(), "window": [window.0, window.1], "fits": fits}))
}

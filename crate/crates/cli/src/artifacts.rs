//! Byte-stable artifact writers.

use std::fs;
use std::path::Path;

use eulerlab_core::diagnostics::NormSeries;
use eulerlab_core::evolve::Record;
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

pub const CONFIG_ECHO: &str = "config.toml";
pub const SERIES_CSV: &str = "series.csv";
pub const REPORT_JSON: &str = "report.json";
pub const PLOT_DIR: &str = "plot";

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

fn csv_error(e: csv::Error) -> CliError {
    CliError::Io(std::io::Error::other(e))
}

/// Long-format series, one row per `(t, sigma)`.
pub fn series_csv(records: &[Record], series: &NormSeries, sigmas: &[f64]) -> CliResult<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["t", "sigma", "x_sigma", "y_sigma", "mass", "min_rho"])
        .map_err(csv_error)?;
    let weighted: Vec<Vec<f64>> = (0..sigmas.len()).map(|i| series.weighted(i)).collect();
    for (n, r) in records.iter().enumerate() {
        for (i, s) in sigmas.iter().enumerate() {
            w.write_record(&[
                r.t.to_string(),
                s.to_string(),
                format!("{:e}", r.norms[i]),
                format!("{:e}", weighted[i][n]),
                format!("{:e}", r.mass),
                format!("{:e}", r.min_rho),
            ])
            .map_err(csv_error)?;
        }
    }
    w.into_inner().map_err(|e| CliError::Io(std::io::Error::other(e.to_string())))
}

/// Whitespace-separated columns `t c_0 c_1 ...` with a `#` header.
pub fn columns(header: &[String], t: &[f64], cols: &[Vec<f64>]) -> String {
    let mut out = format!("# t {}\n", header.join(" "));
    for (n, t) in t.iter().enumerate() {
        out.push_str(&t.to_string());
        for c in cols {
            out.push_str(&format!(" {:e}", c[n]));
        }
        out.push('\n');
    }
    out
}

/// Plain-column data for plotting norms, weighted norms and mass.
pub fn write_plot_bundle(dir: &Path, records: &[Record], series: &NormSeries, sigmas: &[f64]) -> CliResult<()> {
    let plot = dir.join(PLOT_DIR);
    fs::create_dir_all(&plot)?;
    let header: Vec<String> = sigmas.iter().map(|s| format!("sigma={s}")).collect();
    let t = series.times();
    let x: Vec<Vec<f64>> = (0..sigmas.len()).map(|i| series.values(i).to_vec()).collect();
    let w: Vec<Vec<f64>> = (0..sigmas.len()).map(|i| series.plain_weighted(i)).collect();
    fs::write(plot.join("norms.dat"), columns(&header, t, &x))?;
    fs::write(plot.join("weighted.dat"), columns(&header, t, &w))?;
    let mass: Vec<f64> = records.iter().map(|r| r.mass).collect();
    let min_rho: Vec<f64> = records.iter().map(|r| r.min_rho).collect();
    let forcing: Vec<f64> = records.iter().map(|r| r.forcing_l2).collect();
    fs::write(
        plot.join("mass.dat"),
        columns(
            &["mass".into(), "min_rho".into(), "forcing_l2".into()],
            t,
            &[mass, min_rho, forcing],
        ),
    )?;
    Ok(())
}

pub fn write_json(path: &Path, value: &Value) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Io(std::io::Error::other(e)))?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

/// One `(t, sigma, x_sigma)` triple from a stored series.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SeriesRow {
    pub t: f64,
    pub sigma: f64,
    pub x_sigma: f64,
}

pub fn read_series_csv(path: &Path) -> CliResult<Vec<SeriesRow>> {
    let mut r = csv::Reader::from_path(path).map_err(csv_error)?;
    let headers = r.headers().map_err(csv_error)?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| CliError::Config(format!("{} lacks column '{name}'", path.display())))
    };
    let (ct, cs, cx) = (col("t")?, col("sigma")?, col("x_sigma")?);
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(csv_error)?;
        let num = |i: usize| -> CliResult<f64> {
            rec.get(i)
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| CliError::Config(format!("bad number in {}", path.display())))
        };
        rows.push(SeriesRow {
            t: num(ct)?,
            sigma: num(cs)?,
            x_sigma: num(cx)?,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digest_of_empty_input() {
        assert_eq!(
            sha256_hex(b""),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
        );
    }

    #[test]
    fn column_layout() {
        let s = columns(&["a".into()], &[0.0, 0.5], &[vec![1.0, 2.5]]);
        assert_eq!(s, "# t a\n0 1e0\n0.5 2.5e0\n");
    }
}

//! Output writers: deterministic CSV (17 significant digits, '.' decimal,
//! byte-identical across reruns of the same seed), a JSON run report, and
//! optional binary gram dumps.

use std::io::Write;
use std::path::Path;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::config::SCHEMA_VERSION;
use crate::experiments::{DimredCompareOutput, Gp1dOutput, RateSweepOutput, RdCurveOutput};
use crate::CliError;

/// 17 significant digits: enough to round-trip any f64.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn write_csv<P: AsRef<Path>>(
    path: P,
    header: &[&str],
    rows: Vec<Vec<String>>,
) -> Result<(), CliError> {
    let mut writer = csv::WriterBuilder::new()
        .quote_style(csv::QuoteStyle::Necessary)
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(path.as_ref())
        .map_err(|e| CliError::Config(format!("{}: {e}", path.as_ref().display())))?;
    writer
        .write_record(header)
        .and_then(|_| {
            for row in &rows {
                writer.write_record(row)?;
            }
            writer.flush().map_err(csv::Error::from)
        })
        .map_err(|e| CliError::Config(format!("{}: {e}", path.as_ref().display())))?;
    Ok(())
}

/// Wrapper serialized at the top of every JSON report.
#[derive(Serialize)]
struct Report<'a, C: Serialize, O: Serialize> {
    schema: u32,
    experiment: &'a str,
    config: &'a C,
    output: &'a O,
}

pub fn write_json<C: Serialize, O: Serialize>(
    path: &Path,
    experiment: &str,
    config: &C,
    output: &O,
) -> Result<(), CliError> {
    let report = Report {
        schema: SCHEMA_VERSION,
        experiment,
        config,
        output,
    };
    let mut file = std::fs::File::create(path)?;
    serde_json::to_writer_pretty(&mut file, &report)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    file.write_all(b"\n")?;
    Ok(())
}

/// Row-major 64-bit little-endian floats, dimensions in the file name's
/// sibling; intended for offline inspection of completed grams.
pub fn write_matrix_bin(path: &Path, m: &DMatrix<f64>) -> Result<(), CliError> {
    let mut file = std::fs::File::create(path)?;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            file.write_all(&m[(i, j)].to_le_bytes())?;
        }
    }
    Ok(())
}

pub fn write_rd_curve_csv(path: &Path, out: &RdCurveOutput) -> Result<(), CliError> {
    let header = [
        "bits_per_sample",
        "lower_bound_distortion",
        "persym_distortion",
        "dimred_distortion",
        "persym_predicted_distortion",
        "dimred_predicted_distortion",
        "dimred_dims",
    ];
    let rows = out
        .rows
        .iter()
        .map(|r| {
            vec![
                r.bits_per_sample.to_string(),
                fmt_f64(r.lower_bound_distortion),
                fmt_f64(r.persym_distortion),
                fmt_f64(r.dimred_distortion),
                fmt_f64(r.persym_predicted_distortion),
                fmt_f64(r.dimred_predicted_distortion),
                r.dimred_dims.to_string(),
            ]
        })
        .collect();
    write_csv(path, &header, rows)
}

pub fn write_dimred_compare_csv(path: &Path, out: &DimredCompareOutput) -> Result<(), CliError> {
    let header = [
        "m",
        "proposed_distortion",
        "pca_distortion",
        "proposed_wins",
        "instances",
    ];
    let rows = out
        .rows
        .iter()
        .map(|r| {
            vec![
                r.m.to_string(),
                fmt_f64(r.proposed_distortion),
                fmt_f64(r.pca_distortion),
                r.proposed_wins.to_string(),
                r.instances.to_string(),
            ]
        })
        .collect();
    write_csv(path, &header, rows)
}

pub fn write_gp1d_csv(path: &Path, out: &Gp1dOutput) -> Result<(), CliError> {
    let header = [
        "x",
        "true_mean",
        "true_std",
        "quantized_mean",
        "quantized_std",
        "rate",
    ];
    let rows = out
        .points
        .iter()
        .map(|p| {
            vec![
                fmt_f64(p.x),
                fmt_f64(p.true_mean),
                fmt_f64(p.true_std),
                fmt_f64(p.quantized_mean),
                fmt_f64(p.quantized_std),
                p.rate.to_string(),
            ]
        })
        .collect();
    write_csv(path, &header, rows)
}

pub fn write_rate_sweep_csv(path: &Path, out: &RateSweepOutput) -> Result<(), CliError> {
    let header = ["rate", "protocol", "smse", "total_bits", "bcm_fallbacks"];
    let rows = out
        .runs
        .iter()
        .map(|r| {
            vec![
                r.rate.to_string(),
                r.protocol.clone(),
                fmt_f64(r.smse),
                r.total_bits.to_string(),
                r.bcm_fallbacks.to_string(),
            ]
        })
        .collect();
    write_csv(path, &header, rows)
}

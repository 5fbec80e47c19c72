//! Per-iteration trace rows and their CSV form.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use splitkit_core::imaging::DeblurRecord;
use splitkit_core::splitting::ResidualRecord;

use crate::error::{CliError, Result};

pub const HEADER: [&str; 6] = [
    "iteration",
    "residual_gamma",
    "residual_primal",
    "residual_dual",
    "objective",
    "isnr",
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub iteration: usize,
    pub residual_gamma: f64,
    pub residual_primal: f64,
    pub residual_dual: f64,
    pub objective: Option<f64>,
    pub isnr: Option<f64>,
}

impl From<&ResidualRecord> for TraceRow {
    fn from(r: &ResidualRecord) -> Self {
        TraceRow {
            iteration: r.iteration,
            residual_gamma: r.residual_gamma,
            residual_primal: r.residual_primal,
            residual_dual: r.residual_dual,
            objective: None,
            isnr: None,
        }
    }
}

impl From<&DeblurRecord> for TraceRow {
    fn from(r: &DeblurRecord) -> Self {
        TraceRow {
            iteration: r.iteration,
            residual_gamma: r.residual_gamma,
            residual_primal: r.residual_primal,
            residual_dual: r.residual_dual,
            objective: Some(r.objective),
            isnr: r.isnr,
        }
    }
}

/// Shortest decimal that round-trips; empty for missing or NaN values.
fn cell(value: Option<f64>) -> String {
    match value {
        Some(v) if !v.is_nan() => format!("{v}"),
        _ => String::new(),
    }
}

/// Writes the header and one line per row, `\n`-terminated.
pub fn write_trace<W: Write>(rows: &[TraceRow], out: W) -> csv::Result<()> {
    let mut writer = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    writer.write_record(HEADER)?;
    for r in rows {
        writer.write_record([
            r.iteration.to_string(),
            cell(Some(r.residual_gamma)),
            cell(Some(r.residual_primal)),
            cell(Some(r.residual_dual)),
            cell(r.objective),
            cell(r.isnr),
        ])?;
    }
    writer.flush()?;
    Ok(())
}

pub fn write_trace_csv(rows: &[TraceRow], path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| CliError::io(path, e))?;
    write_trace(rows, file).map_err(|e| CliError::Io {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

//! Trial and summary CSV files.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::sweep::{Axis, ResultRow, SweepResult};
use crate::error::{HbfError, Result};

pub const RESULTS_HEADER: &str = "solver,axis,axis_value,trial,se_bits_s_hz,power_mw,ee_bits_hz_j,status";

fn csv_err(e: csv::Error) -> HbfError {
    let line = e.position().map_or(0, |p| p.line() as usize);
    HbfError::Parse {
        line,
        column: None,
        message: e.to_string(),
    }
}

pub fn write_results<W: Write>(rows: &[ResultRow], out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(RESULTS_HEADER.split(',')).map_err(csv_err)?;
    for row in rows {
        w.serialize(row).map_err(csv_err)?;
    }
    w.flush().map_err(|e| HbfError::io("<results>", e))
}

pub fn read_results<R: Read>(input: R) -> Result<Vec<ResultRow>> {
    let mut r = csv::Reader::from_reader(input);
    let header: Vec<String> = r.headers().map_err(csv_err)?.iter().map(str::to_string).collect();
    if header.join(",") != RESULTS_HEADER {
        return Err(HbfError::Parse {
            line: 1,
            column: None,
            message: format!("unexpected header `{}`", header.join(",")),
        });
    }
    r.deserialize().map(|row| row.map_err(csv_err)).collect()
}

pub fn emit_csv(result: &SweepResult, path: impl AsRef<Path>) -> Result<()> {
    if result.rows.is_empty() {
        return Err(HbfError::InvalidArgument("sweep produced no rows".into()));
    }
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| HbfError::io(path, e))?;
    write_results(&result.rows, file)
}

pub fn read_results_csv(path: impl AsRef<Path>) -> Result<SweepResult> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| HbfError::io(path, e))?;
    let rows = read_results(file)?;
    let axis = rows
        .first()
        .map(|r| r.axis)
        .ok_or_else(|| HbfError::Config(format!("{} has no rows", path.display())))?;
    if rows.iter().any(|r| r.axis != axis) {
        return Err(HbfError::Config(format!("{} mixes sweep axes", path.display())));
    }
    Ok(SweepResult { axis, rows })
}

/// Mean and standard error of one solver at one axis value, over trials that
/// completed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub solver: String,
    pub axis: Axis,
    pub axis_value: f64,
    pub n: usize,
    pub failed: usize,
    pub se_mean: f64,
    pub se_stderr: f64,
    pub power_mw_mean: f64,
    pub power_mw_stderr: f64,
    pub ee_mean: f64,
    pub ee_stderr: f64,
}

/// `(mean, standard error)`; NaN mean for no samples, zero error for one.
pub fn mean_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

/// One aggregate per (solver, axis value), sorted by solver then value.
pub fn aggregate(result: &SweepResult) -> Vec<Aggregate> {
    let mut rows: Vec<&ResultRow> = result.rows.iter().collect();
    rows.sort_by(|a, b| a.solver.cmp(&b.solver).then(a.axis_value.total_cmp(&b.axis_value)));
    rows.chunk_by(|a, b| a.solver == b.solver && a.axis_value.total_cmp(&b.axis_value).is_eq())
        .map(|group| {
            let ok: Vec<&&ResultRow> = group.iter().filter(|r| r.is_ok()).collect();
            let col = |f: fn(&ResultRow) -> f64| mean_stderr(&ok.iter().map(|r| f(r)).collect::<Vec<_>>());
            let (se_mean, se_stderr) = col(|r| r.se);
            let (power_mw_mean, power_mw_stderr) = col(|r| r.power_mw);
            let (ee_mean, ee_stderr) = col(|r| r.ee);
            Aggregate {
                solver: group[0].solver.clone(),
                axis: group[0].axis,
                axis_value: group[0].axis_value,
                n: ok.len(),
                failed: group.len() - ok.len(),
                se_mean,
                se_stderr,
                power_mw_mean,
                power_mw_stderr,
                ee_mean,
                ee_stderr,
            }
        })
        .collect()
}

pub fn emit_summary_csv(aggregates: &[Aggregate], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| HbfError::io(path, e))?;
    let mut w = csv::Writer::from_writer(file);
    for a in aggregates {
        w.serialize(a).map_err(csv_err)?;
    }
    w.flush().map_err(|e| HbfError::io(path, e))
}

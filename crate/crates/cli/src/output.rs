//! CSV and JSON writers for the command outputs.
//!
//! Grids are written as a `#` header line with the window followed by `ny`
//! rows of `nx` values, `y` increasing down the file. Values use 17
//! significant digits so that reading them back gives the same `f64`.

use std::io::Write;

use nbs_core::phasespace::{GridSpec, PhaseSpaceGrid};
use nbs_core::stats::StatsReport;
use serde::Serialize;

use crate::error::CliError;

fn io(e: std::io::Error) -> CliError {
    CliError::Io { path: "<output>".into(), source: e }
}

fn csv_err(e: csv::Error) -> CliError {
    match e.into_kind() {
        csv::ErrorKind::Io(e) => io(e),
        other => CliError::Usage(format!("csv serialization failed: {other:?}")),
    }
}

pub fn write_json<T: Serialize + ?Sized>(out: &mut dyn Write, value: &T) -> Result<(), CliError> {
    serde_json::to_writer_pretty(&mut *out, value)
        .map_err(|e| CliError::Usage(format!("json serialization failed: {e}")))?;
    writeln!(out).map_err(io)
}

/// One CSV row per record, with a header taken from the field names.
pub fn write_csv_table<T: Serialize>(out: &mut dyn Write, rows: &[T]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row).map_err(csv_err)?;
    }
    w.flush().map_err(io)
}

/// Header and a single row; `g_values` become `g(lambda)` columns.
pub fn write_stats_csv(out: &mut dyn Write, r: &StatsReport) -> Result<(), CliError> {
    let mut header: Vec<String> = ["eta", "m", "f1", "f2", "mandel_q_closed", "mandel_q_numeric", "vacuum", "eta_minus", "n_max", "tail_bound"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    let mut row = vec![
        format!("{:?}", r.eta),
        r.m.to_string(),
        format!("{:?}", r.f1),
        format!("{:?}", r.f2),
        format!("{:?}", r.mandel_q_closed),
        format!("{:?}", r.mandel_q_numeric),
        r.vacuum.to_string(),
        format!("{:?}", r.eta_minus),
        r.n_max.to_string(),
        format!("{:?}", r.tail_bound),
    ];
    for (lambda, g) in &r.g_values {
        header.push(format!("g({lambda})"));
        row.push(format!("{g:?}"));
    }
    let mut w = csv::Writer::from_writer(out);
    w.write_record(&header).map_err(csv_err)?;
    w.write_record(&row).map_err(csv_err)?;
    w.flush().map_err(io)
}

pub fn grid_header(spec: &GridSpec) -> String {
    format!(
        "# x_min={:?},x_max={:?},y_min={:?},y_max={:?},nx={},ny={}",
        spec.x_min, spec.x_max, spec.y_min, spec.y_max, spec.nx, spec.ny
    )
}

pub fn write_grid_csv(out: &mut dyn Write, grid: &PhaseSpaceGrid) -> Result<(), CliError> {
    writeln!(out, "{}", grid_header(&grid.spec)).map_err(io)?;
    let mut line = String::new();
    for row in &grid.values {
        line.clear();
        for (i, v) in row.iter().enumerate() {
            if i > 0 {
                line.push(',');
            }
            line.push_str(&format!("{v:.16e}"));
        }
        writeln!(out, "{line}").map_err(io)?;
    }
    Ok(())
}

/// Inverse of [`write_grid_csv`].
pub fn read_grid_csv(text: &str) -> Result<(GridSpec, Vec<Vec<f64>>), String> {
    let mut lines = text.lines();
    let header = lines
        .next()
        .and_then(|l| l.strip_prefix("# "))
        .ok_or("missing '# ' header line")?;
    let mut spec = GridSpec::default();
    for field in header.split(',') {
        let (key, value) = field.split_once('=').ok_or_else(|| format!("bad header field '{field}'"))?;
        let float = || value.parse::<f64>().map_err(|e| format!("{key}: {e}"));
        let int = || value.parse::<usize>().map_err(|e| format!("{key}: {e}"));
        match key {
            "x_min" => spec.x_min = float()?,
            "x_max" => spec.x_max = float()?,
            "y_min" => spec.y_min = float()?,
            "y_max" => spec.y_max = float()?,
            "nx" => spec.nx = int()?,
            "ny" => spec.ny = int()?,
            _ => return Err(format!("unknown header field '{key}'")),
        }
    }
    let values = lines
        .map(|l| l.split(',').map(|v| v.parse::<f64>().map_err(|e| format!("'{v}': {e}"))).collect())
        .collect::<Result<Vec<Vec<f64>>, String>>()?;
    if values.len() != spec.ny || values.iter().any(|r| r.len() != spec.nx) {
        return Err(format!("expected {} rows of {} values", spec.ny, spec.nx));
    }
    Ok((spec, values))
}

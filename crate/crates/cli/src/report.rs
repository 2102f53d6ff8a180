use std::io::Write;

use serde::Serialize;

use crate::config::{CliResult, Format};

pub const HEADER: &str = "# maass-lab report v1";
pub const COLUMNS: [&str; 11] = [
    "suite",
    "case",
    "k",
    "nu",
    "h",
    "inputs",
    "residual",
    "tolerance",
    "richardson_ratio",
    "pass",
    "wall_ms",
];

/// One checked number, its tolerance and the verdict.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReportRow {
    pub suite: String,
    pub case: String,
    pub k: Option<String>,
    pub nu: Option<String>,
    pub h: Option<f64>,
    pub inputs: String,
    pub residual: f64,
    pub tolerance: f64,
    pub richardson_ratio: Option<f64>,
    pub pass: bool,
    pub wall_ms: Option<f64>,
}

impl ReportRow {
    pub fn key(&self) -> (&str, &str) {
        (&self.suite, &self.case)
    }
}

/// `residual ≤ tolerance`, which is false for NaN.
pub fn passes(residual: f64, tolerance: f64) -> bool {
    residual <= tolerance
}

fn num(x: f64) -> String {
    format!("{x:e}")
}

fn opt_num(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

pub fn sort_rows(rows: &mut [ReportRow]) {
    rows.sort_by(|a, b| a.key().cmp(&b.key()));
}

pub fn write_csv<W: Write>(rows: &[ReportRow], mut out: W) -> CliResult<()> {
    writeln!(out, "{HEADER}")?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(COLUMNS)?;
    for r in rows {
        w.write_record([
            r.suite.clone(),
            r.case.clone(),
            r.k.clone().unwrap_or_default(),
            r.nu.clone().unwrap_or_default(),
            opt_num(r.h),
            r.inputs.clone(),
            num(r.residual),
            num(r.tolerance),
            opt_num(r.richardson_ratio),
            r.pass.to_string(),
            r.wall_ms.map(|t| format!("{t:.3}")).unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct JsonReport<'a> {
    version: &'static str,
    rows: &'a [ReportRow],
}

pub fn write_json<W: Write>(rows: &[ReportRow], mut out: W) -> CliResult<()> {
    let doc = JsonReport {
        version: "maass-lab report v1",
        rows,
    };
    serde_json::to_writer_pretty(&mut out, &doc).map_err(std::io::Error::from)?;
    writeln!(out)?;
    Ok(())
}

pub fn write_report<W: Write>(rows: &[ReportRow], format: Format, out: W) -> CliResult<()> {
    match format {
        Format::Csv => write_csv(rows, out),
        Format::Json => write_json(rows, out),
    }
}

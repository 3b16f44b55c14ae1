//! `errors.csv` and `report.json` writers.

use std::fmt::Write as _;
use std::path::Path;

use super::experiment::ErrorReport;
use crate::error::{Error, Result};

pub const CSV_HEADER: &str = "omega_1,omega_2,err_bhi,err_thi,iters_bhi";

fn sci(x: f64) -> String {
    format!("{x:.16e}")
}

/// One row per grid point, 17 significant digits, empty cells for methods
/// that were not run.
pub fn errors_csv(report: &ErrorReport) -> String {
    let mut out = String::with_capacity(report.records.len() * 100);
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in &report.records {
        let opt = |x: Option<f64>| x.map(sci).unwrap_or_default();
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            sci(r.omega[0]),
            sci(r.omega[1]),
            opt(r.err_bhi),
            opt(r.err_thi),
            r.iters_bhi.map(|i| i.to_string()).unwrap_or_default()
        );
    }
    out
}

pub fn report_json(report: &ErrorReport) -> String {
    serde_json::to_string_pretty(report).expect("report serializes")
}

fn write(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text)
        .map_err(|e| Error::InvalidInput(format!("cannot write {}: {e}", path.display())))
}

pub fn write_errors_csv(report: &ErrorReport, path: &Path) -> Result<()> {
    write(path, &errors_csv(report))
}

pub fn write_report_json(report: &ErrorReport, path: &Path) -> Result<()> {
    write(path, &report_json(report))
}

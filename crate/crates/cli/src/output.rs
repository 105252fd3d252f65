use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::CliError;
use crate::runner::{ComparisonRow, RunOutput};
use crate::spec::ExperimentSpec;

pub const CSV_HEADER: &str = "sweep,analytic,analytic_err,mc,mc_stderr,n_trials,z";

/// Writes rows as CSV with the fixed header.
pub fn write_csv<W: Write>(rows: &[ComparisonRow], out: W) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    if rows.is_empty() {
        w.write_record(CSV_HEADER.split(','))?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Serialize)]
struct Sidecar<'a> {
    spec: &'a ExperimentSpec,
    sweep_variable: &'a str,
    versions: Versions,
    wall_time_seconds: f64,
    rows_written: usize,
    max_abs_z: Option<f64>,
    error: Option<String>,
}

#[derive(Debug, Serialize)]
struct Versions {
    coxcell_cli: &'static str,
    coxcell_core: &'static str,
}

pub fn sidecar_path(csv: &Path) -> PathBuf {
    csv.with_extension("json")
}

/// Writes `<path>` and its JSON sidecar. Partial rows are written even when
/// the run stopped early.
pub fn write_files(path: &Path, spec: &ExperimentSpec, out: &RunOutput, wall_time: f64) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    write_csv(&out.rows, std::io::BufWriter::new(std::fs::File::create(path)?))?;
    let sidecar = Sidecar {
        spec,
        sweep_variable: spec.sweep.var.name(),
        versions: Versions { coxcell_cli: env!("CARGO_PKG_VERSION"), coxcell_core: coxcell_core::VERSION },
        wall_time_seconds: wall_time,
        rows_written: out.rows.len(),
        max_abs_z: out.max_abs_z(),
        error: out.error.as_ref().map(|e| e.to_string()),
    };
    let f = std::fs::File::create(sidecar_path(path))?;
    serde_json::to_writer_pretty(std::io::BufWriter::new(f), &sidecar)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_and_empty_cells() {
        let rows = [ComparisonRow {
            sweep: 0.5,
            analytic: Some(0.25),
            analytic_err: Some(1e-9),
            mc: None,
            mc_stderr: None,
            n_trials: None,
            z: None,
        }];
        let mut buf = Vec::new();
        write_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some(CSV_HEADER));
        assert_eq!(lines.next(), Some("0.5,0.25,1e-9,,,,"));
    }

    #[test]
    fn empty_output_still_has_header() {
        let mut buf = Vec::new();
        write_csv(&[], &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().trim_end(), CSV_HEADER);
    }
}

use std::path::{Path, PathBuf};
use std::str::FromStr;

use insole_grf::dataio::{Component, Side};
use insole_grf::{Error, Result};

use super::FIT_HEADER;
use crate::manifest::Inputs;
use crate::output::{csv_bytes, rounded, Outputs};

pub const REPORT_HEADER: [&str; 13] = [
    "run",
    "foot",
    "component",
    "model",
    "k",
    "role",
    "nrmse_fit_pct",
    "r2_cycles",
    "r2_series",
    "rmse_abs_n",
    "rmse_cycle_abs_n",
    "rmse_norm_pct",
    "normalizer",
];

fn col(header: &csv::StringRecord, name: &str, path: &Path) -> Result<usize> {
    header.iter().position(|h| h == name).ok_or_else(|| Error::Schema(format!("{}: missing column '{name}'", path.display())))
}

fn parse_f64(s: &str) -> Result<f64> {
    if s.is_empty() {
        return Ok(f64::NAN);
    }
    s.parse().map_err(|_| Error::Schema(format!("not a number: '{s}'")))
}

fn run_name(dir: &Path) -> String {
    dir.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| dir.display().to_string())
}

/// One row per run × foot × component for the selected model, on validation
/// data when the run has it. Normalized RMSE uses the peak for the vertical
/// component and the range for the mediolateral one.
pub fn run(runs: &[PathBuf], inputs: &mut Inputs, out: &mut Outputs) -> Result<()> {
    let mut rows = Vec::new();
    for dir in runs {
        let path = dir.join("fit_report.csv");
        let bytes = std::fs::read(&path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        inputs.add_bytes(&path, &bytes);
        let mut rd = csv::Reader::from_reader(bytes.as_slice());
        let header = rd.headers()?.clone();
        let idx: Vec<usize> = FIT_HEADER.iter().map(|n| col(&header, n, &path)).collect::<Result<_>>()?;
        let get = |rec: &csv::StringRecord, name: &str| -> String {
            let i = FIT_HEADER.iter().position(|h| *h == name).expect("known column");
            rec.get(idx[i]).unwrap_or("").to_string()
        };
        let records: Vec<csv::StringRecord> = rd.records().collect::<std::result::Result<_, _>>()?;
        let before = rows.len();
        for side in Side::BOTH {
            for comp in Component::BOTH {
                let sel: Vec<&csv::StringRecord> = records
                    .iter()
                    .filter(|r| {
                        get(r, "selected") == "true"
                            && Side::from_str(&get(r, "foot")).ok() == Some(side)
                            && Component::from_str(&get(r, "component")).ok() == Some(comp)
                    })
                    .collect();
                let Some(r) = sel.iter().find(|r| get(r, "role") == "validation").or(sel.first()) else {
                    continue;
                };
                let (norm, norm_name) = match comp {
                    Component::Vertical => (parse_f64(&get(r, "rmse_norm_max_pct"))?, "max"),
                    Component::Mediolateral => (parse_f64(&get(r, "rmse_norm_range_pct"))?, "range"),
                };
                rows.push(vec![
                    run_name(dir),
                    side.name().to_string(),
                    comp.code().to_string(),
                    get(r, "model"),
                    get(r, "k"),
                    get(r, "role"),
                    rounded(parse_f64(&get(r, "nrmse_fit_pct"))?, 1),
                    rounded(parse_f64(&get(r, "r2_cycles"))?, 2),
                    rounded(parse_f64(&get(r, "r2_series"))?, 2),
                    rounded(parse_f64(&get(r, "rmse_abs_n"))?, 1),
                    rounded(parse_f64(&get(r, "rmse_cycle_abs_n"))?, 1),
                    rounded(norm, 1),
                    norm_name.to_string(),
                ]);
            }
        }
        if rows.len() == before {
            return Err(Error::Schema(format!("{}: no selected model rows", path.display())));
        }
    }
    out.add("report.csv", csv_bytes(&REPORT_HEADER, rows)?)?;
    Ok(())
}

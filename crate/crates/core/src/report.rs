//! Bit-stable CSV and JSON writers.
//!
//! Floats are written with 17 significant digits in scientific notation, so
//! every value parses back to the identical `f64`. Lines end in `\n`.

use std::fs;
use std::io::{self, Write};
use std::path::Path;

use serde_json::json;

use crate::scatter::ScatterPoint;
use crate::simulator::{CellResult, CellRun, ReplicateRecord};

pub const SUMMARY_HEADER: &str =
    "method,mechanism,rho,n,avg_estimate,relative_bias_pct,coverage_pct,avg_ci_width,avg_y_mean,avg_y_sd,reps";
pub const REPLICATE_HEADER: &str =
    "rep,estimate,se,dof,ci_low,ci_high,covered,y_mean,y_sd,missing_fraction,redraws";
pub const SCATTER_HEADER: &str = "x,y,status";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn extension(&self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn summary_row(r: &CellResult) -> String {
    let c = &r.cell;
    [
        c.method.label().to_string(),
        c.condition.mechanism.label().to_string(),
        fmt_f64(c.condition.rho),
        c.condition.n.to_string(),
        fmt_f64(r.avg_estimate),
        r.relative_bias_pct.map(fmt_f64).unwrap_or_default(),
        fmt_f64(r.coverage_pct),
        fmt_f64(r.avg_ci_width),
        fmt_f64(r.avg_y_mean),
        fmt_f64(r.avg_y_sd),
        r.reps_completed.to_string(),
    ]
    .join(",")
}

pub fn summary_csv<'a>(results: impl IntoIterator<Item = &'a CellResult>) -> String {
    let mut out = String::from(SUMMARY_HEADER);
    out.push('\n');
    for r in results {
        out.push_str(&summary_row(r));
        out.push('\n');
    }
    out
}

pub fn replicates_csv(records: &[ReplicateRecord]) -> String {
    let mut out = String::from(REPLICATE_HEADER);
    out.push('\n');
    for r in records {
        let row = [
            r.rep.to_string(),
            fmt_f64(r.estimate),
            fmt_f64(r.se),
            fmt_f64(r.dof),
            fmt_f64(r.ci_low),
            fmt_f64(r.ci_high),
            u8::from(r.covered).to_string(),
            fmt_f64(r.y_mean),
            fmt_f64(r.y_sd),
            fmt_f64(r.missing_fraction),
            r.redraws.to_string(),
        ];
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

pub fn scatter_csv(points: &[ScatterPoint]) -> String {
    let mut out = String::from(SCATTER_HEADER);
    out.push('\n');
    for p in points {
        out.push_str(&format!(
            "{},{},{}\n",
            fmt_f64(p.x),
            fmt_f64(p.y),
            p.status.label()
        ));
    }
    out
}

fn summary_json_value(r: &CellResult) -> serde_json::Value {
    let c = &r.cell;
    json!({
        "method": c.method.label(),
        "mechanism": c.condition.mechanism.label(),
        "rho": c.condition.rho,
        "n": c.condition.n,
        "avg_estimate": r.avg_estimate,
        "relative_bias_pct": r.relative_bias_pct,
        "coverage_pct": r.coverage_pct,
        "avg_ci_width": r.avg_ci_width,
        "avg_y_mean": r.avg_y_mean,
        "avg_y_sd": r.avg_y_sd,
        "reps": r.reps_completed,
    })
}

pub fn summary_json<'a>(results: impl IntoIterator<Item = &'a CellResult>) -> String {
    let rows: Vec<_> = results.into_iter().map(summary_json_value).collect();
    let mut s = serde_json::to_string_pretty(&rows).expect("summary serializes");
    s.push('\n');
    s
}

fn to_json<T: serde::Serialize + ?Sized>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("value serializes");
    s.push('\n');
    s
}

/// Fail early if `dir` cannot be created or written.
pub fn ensure_writable(dir: &Path) -> io::Result<()> {
    fs::create_dir_all(dir)?;
    let probe = dir.join(".pmmlab-write-probe");
    fs::File::create(&probe)?.write_all(b"")?;
    fs::remove_file(probe)
}

fn write(path: &Path, contents: &str) -> io::Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    fs::write(path, contents)
}

/// `<stem>.<ext>` plus `replicates/<cell-id>.<ext>` for every run.
pub fn write_runs(dir: &Path, stem: &str, runs: &[CellRun], format: Format) -> io::Result<()> {
    let ext = format.extension();
    let results: Vec<&CellResult> = runs.iter().map(|r| &r.result).collect();
    let summary = match format {
        Format::Csv => summary_csv(results.iter().copied()),
        Format::Json => summary_json(results.iter().copied()),
    };
    write(&dir.join(format!("{stem}.{ext}")), &summary)?;
    for run in runs {
        let body = match format {
            Format::Csv => replicates_csv(&run.records),
            Format::Json => to_json(&run.records),
        };
        write(
            &dir.join("replicates")
                .join(format!("{}.{ext}", run.result.cell.id())),
            &body,
        )?;
    }
    Ok(())
}

pub fn write_scatter(dir: &Path, points: &[ScatterPoint], format: Format) -> io::Result<()> {
    let body = match format {
        Format::Csv => scatter_csv(points),
        Format::Json => to_json(points),
    };
    write(&dir.join(format!("scatter.{}", format.extension())), &body)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_format_round_trips() {
        for v in [0.8, 0.1 + 0.2, -86.000000000001, 1e-300, 123456.789, 0.0] {
            let s = fmt_f64(v);
            assert_eq!(s.parse::<f64>().unwrap(), v, "{s}");
        }
        assert_eq!(fmt_f64(0.8), "8.0000000000000004e-1");
    }
}

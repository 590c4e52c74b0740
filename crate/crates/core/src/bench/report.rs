use std::fmt::Write as _;
use std::path::Path;

use super::estimators::EstimatorKind;
use super::runner::{BenchmarkRecord, SweepPoint};
use crate::{Error, Result};

pub const RESULTS_HEADER: [&str; 7] =
    ["estimator", "scenario", "rmse_m", "rmse_std_m", "tpi_ms", "tpi_std_ms", "trials"];

pub const SWEEP_HEADER: [&str; 10] = [
    "parameter",
    "value",
    "estimator",
    "scenario",
    "rmse_m",
    "rmse_std_m",
    "rmse_median_m",
    "tpi_ms",
    "tpi_std_ms",
    "trials",
];

pub fn write_results_csv(path: &Path, records: &[BenchmarkRecord]) -> Result<()> {
    write_results_csv_to(std::fs::File::create(path)?, records)
}

pub fn write_results_csv_to<W: std::io::Write>(writer: W, records: &[BenchmarkRecord]) -> Result<()> {
    if records.is_empty() {
        return Err(Error::Empty("benchmark records"));
    }
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(writer);
    w.write_record(RESULTS_HEADER)?;
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_results_csv(path: &Path) -> Result<Vec<BenchmarkRecord>> {
    read_results_csv_from(std::fs::File::open(path)?)
}

pub fn read_results_csv_from<R: std::io::Read>(reader: R) -> Result<Vec<BenchmarkRecord>> {
    let mut rdr = csv::Reader::from_reader(reader);
    if rdr.headers()?.iter().ne(RESULTS_HEADER.iter().copied()) {
        return Err(Error::Schema(format!("results CSV must start with `{}`", RESULTS_HEADER.join(","))));
    }
    rdr.deserialize().map(|r| r.map_err(Error::from)).collect()
}

/// Long-format sweep table: one row per (value, estimator, scenario).
pub fn write_sweep_csv(path: &Path, points: &[SweepPoint]) -> Result<()> {
    write_sweep_csv_to(std::fs::File::create(path)?, points)
}

pub fn write_sweep_csv_to<W: std::io::Write>(writer: W, points: &[SweepPoint]) -> Result<()> {
    if points.is_empty() {
        return Err(Error::Empty("sweep points"));
    }
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(SWEEP_HEADER)?;
    for p in points {
        for r in &p.report.records {
            let median = r
                .estimator
                .parse::<EstimatorKind>()
                .ok()
                .and_then(|k| p.report.median_rmse(k, &r.scenario))
                .unwrap_or(f64::NAN);
            w.write_record([
                p.parameter.name().to_string(),
                p.value.to_string(),
                r.estimator.clone(),
                r.scenario.clone(),
                r.rmse_m.to_string(),
                r.rmse_std_m.to_string(),
                median.to_string(),
                r.tpi_ms.to_string(),
                r.tpi_std_ms.to_string(),
                r.trials.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Plain-text table with one row per estimator and an RMSE / TPI column pair
/// per scenario.
pub fn render_summary(records: &[BenchmarkRecord]) -> String {
    let mut estimators: Vec<&str> = Vec::new();
    let mut scenarios: Vec<&str> = Vec::new();
    for r in records {
        if !estimators.contains(&r.estimator.as_str()) {
            estimators.push(&r.estimator);
        }
        if !scenarios.contains(&r.scenario.as_str()) {
            scenarios.push(&r.scenario);
        }
    }
    let label =
        |id: &str| id.parse::<EstimatorKind>().map(|k| k.label().to_string()).unwrap_or_else(|_| id.to_string());
    let cell_w = 30;
    let name_w = estimators.iter().map(|e| label(e).len()).max().unwrap_or(0).max("Estimator".len());

    let mut out = String::new();
    let _ = write!(out, "{:name_w$}", "Estimator");
    for s in &scenarios {
        let _ = write!(out, " | {s:cell_w$}");
    }
    out.push('\n');
    let _ = write!(out, "{:name_w$}", "");
    for _ in &scenarios {
        let _ = write!(out, " | {:15}{:15}", "RMSE (m)", "TPI (ms)");
    }
    out.push('\n');
    out.push_str(&"-".repeat(name_w + scenarios.len() * (cell_w + 3)));
    out.push('\n');
    for e in &estimators {
        let _ = write!(out, "{:name_w$}", label(e));
        for s in &scenarios {
            match records.iter().find(|r| r.estimator == *e && r.scenario == *s) {
                Some(r) => {
                    let rmse = format!("{:.2} ± {:.2}", r.rmse_m, r.rmse_std_m);
                    let tpi = format!("{:.3} ± {:.3}", r.tpi_ms, r.tpi_std_ms);
                    let _ = write!(out, " | {rmse:15}{tpi:15}");
                }
                None => {
                    let _ = write!(out, " | {:cell_w$}", "n/a");
                }
            }
        }
        out.push('\n');
    }
    let trials: Vec<usize> = records.iter().map(|r| r.trials).collect();
    if let (Some(lo), Some(hi)) = (trials.iter().min(), trials.iter().max()) {
        if lo == hi {
            let _ = writeln!(out, "\nmean ± std over {lo} trials");
        } else {
            let _ = writeln!(out, "\nmean ± std over {lo} to {hi} trials");
        }
    }
    out
}

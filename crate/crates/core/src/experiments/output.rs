use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use crate::error::{Error, Result};
use crate::stats::Estimate;

pub const CSV_HEADER: &str = "experiment,n,statistic,value,std_err,reps,boundary_frac,seed";
/// Rows whose statistic starts with this prefix are pass (1) / fail (0) checks.
pub const CHECK_PREFIX: &str = "check.";
/// Boundary-touch fraction above which a run is flagged.
pub const BOUNDARY_FLAG_THRESHOLD: f64 = 0.01;

/// One CSV line. Field order is the column order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub experiment: String,
    pub n: usize,
    pub statistic: String,
    pub value: f64,
    pub std_err: f64,
    pub reps: usize,
    pub boundary_frac: f64,
    pub seed: u64,
}

impl ResultRow {
    pub fn is_check(&self) -> bool {
        self.statistic.starts_with(CHECK_PREFIX)
    }

    pub fn check_failed(&self) -> bool {
        self.is_check() && self.value != 1.0
    }
}

/// Shared fields of the rows for one `(experiment, n)` cell.
#[derive(Debug, Clone)]
pub struct RowSink<'a> {
    pub experiment: &'a str,
    pub seed: u64,
    pub rows: Vec<ResultRow>,
}

impl<'a> RowSink<'a> {
    pub fn new(experiment: &'a str, seed: u64) -> Self {
        Self {
            experiment,
            seed,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, n: usize, statistic: impl Into<String>, est: Estimate, reps: usize, boundary_frac: f64) {
        self.rows.push(ResultRow {
            experiment: self.experiment.to_string(),
            n,
            statistic: statistic.into(),
            value: est.value,
            std_err: est.std_err,
            reps,
            boundary_frac,
            seed: self.seed,
        });
    }

    pub fn value(&mut self, n: usize, statistic: impl Into<String>, value: f64, reps: usize, boundary_frac: f64) {
        self.push(n, statistic, Estimate { value, std_err: 0.0 }, reps, boundary_frac);
    }

    pub fn check(&mut self, n: usize, name: impl AsRef<str>, pass: bool, reps: usize, boundary_frac: f64) {
        let statistic = format!("{CHECK_PREFIX}{}", name.as_ref());
        self.value(n, statistic, if pass { 1.0 } else { 0.0 }, reps, boundary_frac);
    }
}

pub fn write_csv(path: &Path, rows: &[ResultRow]) -> Result<()> {
    let io = |e: std::io::Error| Error::Io(format!("{}: {e}", path.display()));
    if let Some(dir) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(io)?;
    }
    let file = std::fs::File::create(path).map_err(io)?;
    let mut w = csv::Writer::from_writer(std::io::BufWriter::new(file));
    for row in rows {
        w.serialize(row).map_err(|e| Error::Io(e.to_string()))?;
    }
    if rows.is_empty() {
        w.write_record(CSV_HEADER.split(',')).map_err(|e| Error::Io(e.to_string()))?;
    }
    w.flush().map_err(io)?;
    Ok(())
}

pub fn read_csv(path: &Path) -> Result<Vec<ResultRow>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    r.deserialize()
        .map(|row| row.map_err(|e| Error::Io(e.to_string())))
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest<'a> {
    pub artifact: &'static str,
    pub version: &'static str,
    pub config: &'a ExperimentConfig,
    pub experiments: Vec<String>,
    pub rows: usize,
    pub failed_checks: Vec<String>,
    pub boundary_flagged: bool,
    pub wall_time_secs: f64,
}

pub fn manifest_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}

pub fn write_manifest(out: &Path, manifest: &Manifest<'_>) -> Result<PathBuf> {
    let path = manifest_path(out);
    let io = |e: std::io::Error| Error::Io(format!("{}: {e}", path.display()));
    let mut f = std::fs::File::create(&path).map_err(io)?;
    let text = serde_json::to_string_pretty(manifest).map_err(|e| Error::Io(e.to_string()))?;
    f.write_all(text.as_bytes()).map_err(io)?;
    f.write_all(b"\n").map_err(io)?;
    Ok(path)
}

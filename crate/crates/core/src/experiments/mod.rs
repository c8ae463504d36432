//! Seeded Monte Carlo experiments with CSV and JSON-manifest output.
//!
//! Replication `r` at displacement `n` draws its environment from the seed
//! `hash(master_seed, experiment, n, r)`. Replications run on a private rayon
//! pool and are gathered in index order, so the worker count never changes
//! the output bytes.

pub mod config;
pub mod output;

mod geodesic;
mod suites;

use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;

pub use config::{CheapPathMode, ExperimentConfig, ExperimentKind, SCHEMA};
pub use output::{ResultRow, BOUNDARY_FLAG_THRESHOLD, CHECK_PREFIX, CSV_HEADER};

use crate::distributions::check_assumptions;
use crate::error::{Error, Result};
use crate::lattice::BoxDomain;
use crate::rng::{hash_str, hash_words};

pub fn replication_seed(master_seed: u64, kind: ExperimentKind, n: usize, rep: usize) -> u64 {
    hash_words(master_seed, &[hash_str(kind.name()), n as u64, rep as u64])
}

/// `⌊n^{1/4}⌋`, computed in integers.
pub fn lattice_radius(n: usize) -> usize {
    let mut r = (n as f64).powf(0.25) as usize + 1;
    while r.pow(4) > n {
        r -= 1;
    }
    r
}

/// Padding `⌈n^{pad_exponent}⌉ + m` on each side of `[0, n]^d`.
pub fn pad_size(n: usize, pad_exponent: f64) -> usize {
    let p = (n as f64).powf(pad_exponent);
    // absorb powf rounding at exact integers, e.g. 16^0.75
    let p = if (p - p.round()).abs() < 1e-9 { p.round() } else { p.ceil() };
    p as usize + lattice_radius(n)
}

/// The box `[−P, n + P]^d` used for displacement `n·e₁`.
pub fn padded_box(d: usize, n: usize, pad_exponent: f64) -> Result<BoxDomain> {
    let p = pad_size(n, pad_exponent) as i32;
    BoxDomain::cube(d, -p, n as i32 + p)
}

pub(crate) fn build_pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))
}

/// Run `f` for every replication index on the pool, results in index order.
pub(crate) fn replicate<T, F>(pool: &rayon::ThreadPool, reps: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync + Send,
{
    pool.install(|| (0..reps).into_par_iter().map(&f).collect())
}

/// Rows of one experiment.
pub fn run_experiment(cfg: &ExperimentConfig, kind: ExperimentKind, workers: usize) -> Result<Vec<ResultRow>> {
    let mut cfg = cfg.clone();
    cfg.experiment = kind;
    cfg.validate()?;
    if kind.uses_geodesics() {
        let report = check_assumptions(&cfg.law, cfg.d)?;
        if !report.satisfies_geodesic_condition {
            return Err(Error::Assumption(format!(
                "the law puts mass {} at 0, which is not below p_c({}) = {}; passage times degenerate",
                report.atom_at_zero_mass, cfg.d, report.pc_threshold
            )));
        }
    }
    let pool = build_pool(workers)?;
    match kind {
        ExperimentKind::VarianceScaling => geodesic::run_variance_scaling(&cfg, &pool),
        ExperimentKind::FmCompare => geodesic::run_fm_compare(&cfg, &pool),
        ExperimentKind::GeoLength => geodesic::run_geo_length(&cfg, &pool),
        ExperimentKind::LowDensity => geodesic::run_low_density(&cfg, &pool),
        ExperimentKind::CheapPath => geodesic::run_cheap_path(&cfg, &pool),
        ExperimentKind::Animals => suites::run_animals(&cfg, &pool),
        ExperimentKind::Encoding => suites::run_encoding(&cfg, &pool),
        ExperimentKind::EntropySuite => suites::run_entropy_suite(&cfg, &pool),
    }
}

/// Workers from the `WORKERS` environment variable (default 1).
pub fn workers_from_env() -> Result<usize> {
    match std::env::var("WORKERS") {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|w| *w > 0)
            .ok_or_else(|| Error::Config(format!("WORKERS must be a positive integer, got {v:?}"))),
        Err(_) => Ok(1),
    }
}

pub fn failed_checks(rows: &[ResultRow]) -> Vec<&ResultRow> {
    rows.iter().filter(|r| r.check_failed()).collect()
}

pub fn boundary_flagged(rows: &[ResultRow]) -> bool {
    rows.iter().any(|r| r.boundary_frac > BOUNDARY_FLAG_THRESHOLD)
}

/// Outcome of [`run_and_write`].
#[derive(Debug, Clone)]
pub struct RunSummary {
    pub rows: Vec<ResultRow>,
    pub manifest_path: std::path::PathBuf,
    pub wall_time_secs: f64,
}

/// Run the experiments, write the CSV to `cfg.out_path` and the manifest next to it.
pub fn run_and_write(cfg: &ExperimentConfig, kinds: &[ExperimentKind], workers: usize) -> Result<RunSummary> {
    let start = Instant::now();
    let mut rows = Vec::new();
    for &kind in kinds {
        rows.extend(run_experiment(cfg, kind, workers)?);
    }
    let out = Path::new(&cfg.out_path);
    output::write_csv(out, &rows)?;
    let wall = start.elapsed().as_secs_f64();
    let manifest = output::Manifest {
        artifact: "fpp-lab",
        version: env!("CARGO_PKG_VERSION"),
        config: cfg,
        experiments: kinds.iter().map(|k| k.name().to_string()).collect(),
        rows: rows.len(),
        failed_checks: failed_checks(&rows).iter().map(|r| r.statistic.clone()).collect(),
        boundary_flagged: boundary_flagged(&rows),
        wall_time_secs: wall,
    };
    let manifest_path = output::write_manifest(out, &manifest)?;
    Ok(RunSummary {
        rows,
        manifest_path,
        wall_time_secs: wall,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn radius_is_integer_fourth_root() {
        let cases = [(1, 1), (15, 1), (16, 2), (80, 2), (81, 3), (128, 3), (256, 4), (624, 4), (625, 5)];
        for (n, r) in cases {
            assert_eq!(lattice_radius(n), r, "n = {n}");
        }
    }

    #[test]
    fn padding() {
        assert_eq!(pad_size(16, 0.75), 8 + 2);
        assert_eq!(pad_size(128, 0.75), 39 + 3);
        assert_eq!(pad_size(10, 0.0), 1 + 1);
        let b = padded_box(2, 16, 0.75).unwrap();
        assert_eq!(b.lo().0[0], -10);
        assert_eq!(b.hi().0[1], 26);
    }

    #[test]
    fn seeds_differ_by_every_coordinate() {
        let k = ExperimentKind::VarianceScaling;
        let s = replication_seed(1, k, 16, 0);
        assert_ne!(s, replication_seed(2, k, 16, 0));
        assert_ne!(s, replication_seed(1, ExperimentKind::GeoLength, 16, 0));
        assert_ne!(s, replication_seed(1, k, 32, 0));
        assert_ne!(s, replication_seed(1, k, 16, 1));
    }
}

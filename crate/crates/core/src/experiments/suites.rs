//! Experiments that do not solve for geodesics: lattice animals, the
//! Bernoulli encoder and the finite entropy suite.

use super::output::{ResultRow, RowSink};
use super::{ExperimentConfig, ExperimentKind};
use crate::animals::{self, BernoulliGrid};
use crate::encoding;
use crate::entropy;
use crate::error::Result;
use crate::rng::{hash_str, hash_words};

/// Ceiling on `E N_n / (n p^{1/d})` used as the boundedness check.
pub const ANIMAL_RATIO_CEILING: f64 = 8.0;
/// Largest `n` at which branch-and-bound is cross-checked against plain enumeration.
pub const SPOT_CHECK_MAX_N: usize = 8;
const SPOT_CHECKS_PER_N: usize = 4;

pub(super) fn run_animals(cfg: &ExperimentConfig, pool: &rayon::ThreadPool) -> Result<Vec<ResultRow>> {
    let kind = ExperimentKind::Animals;
    let mut sink = RowSink::new(kind.name(), cfg.master_seed);
    let reps = cfg.replications;
    let ps = cfg.p_values();
    for &n in &cfg.n_values {
        let seed = hash_words(cfg.master_seed, &[hash_str(kind.name()), n as u64]);
        let mut bounded = true;
        for &p in &ps {
            let ratio = pool.install(|| animals::scaling_ratio(cfg.d, n, p, reps, seed))?;
            sink.push(n, format!("ratio_p={p}"), ratio, reps, 0.0);
            bounded &= ratio.value <= ANIMAL_RATIO_CEILING;
            if p == 1.0 {
                sink.check(n, "ratio_at_p1_is_one", ratio.value == 1.0, reps, 0.0);
            }
        }
        sink.check(n, "ratio_below_ceiling", bounded, reps, 0.0);
    }
    let spot_seed = hash_words(cfg.master_seed, &[hash_str("animals.spot")]);
    let mut agree = true;
    let mut checked = 0usize;
    for n in 1..=SPOT_CHECK_MAX_N.min(if cfg.d == 2 { animals::MAX_N_2D } else { animals::MAX_N_3D }) {
        for (i, &p) in ps.iter().enumerate() {
            for k in 0..SPOT_CHECKS_PER_N {
                let grid = BernoulliGrid::sample(cfg.d, n, p, hash_words(spot_seed, &[n as u64, i as u64, k as u64]))?;
                agree &= animals::exact_nn(&grid, n)? == animals::plain_nn(&grid, n)?;
                checked += 1;
            }
        }
    }
    sink.check(SPOT_CHECK_MAX_N, "exact_matches_plain", agree, checked, 0.0);
    Ok(sink.rows)
}

pub(super) fn run_encoding(cfg: &ExperimentConfig, pool: &rayon::ThreadPool) -> Result<Vec<ResultRow>> {
    let kind = ExperimentKind::Encoding;
    let mut sink = RowSink::new(kind.name(), cfg.master_seed);
    let depth = cfg.depth();
    let samples = cfg.samples();
    let small = depth.min(12);
    let mut laws = crate::distributions::reference_laws();
    laws.push(("config", cfg.law.clone()));
    let n = depth as usize;
    let results = pool.install(|| {
        use rayon::prelude::*;
        laws.par_iter()
            .map(|(_, law)| {
                let ks = encoding::verify_pushforward(law, depth, samples, cfg.master_seed)?;
                let report = encoding::exhaustive_check(law, small)?;
                Ok((ks, report))
            })
            .collect::<Result<Vec<_>>>()
    })?;
    let band = encoding::pushforward_band(samples, depth);
    sink.value(n, "ks_band", band, samples, 0.0);
    for ((name, _), (ks, report)) in laws.iter().zip(results) {
        sink.value(n, format!("ks.{name}"), ks, samples, 0.0);
        sink.check(n, format!("ks.{name}"), ks <= band, samples, 0.0);
        let total = 1usize << small;
        sink.value(small as usize, format!("pushforward_sup.{name}"), report.pushforward_sup_distance, total, 0.0);
        sink.check(small as usize, format!("exhaustive.{name}"), report.passes(), total, 0.0);
    }
    Ok(sink.rows)
}

pub(super) fn run_entropy_suite(cfg: &ExperimentConfig, pool: &rayon::ThreadPool) -> Result<Vec<ResultRow>> {
    let kind = ExperimentKind::EntropySuite;
    let mut sink = RowSink::new(kind.name(), cfg.master_seed);
    let results = pool.install(|| entropy::run_suite(cfg.replications, cfg.environments(), cfg.master_seed))?;
    for r in results {
        sink.value(0, format!("min_slack.{}", r.name), r.min_slack, r.instances, 0.0);
        sink.value(0, format!("failures.{}", r.name), r.failures as f64, r.instances, 0.0);
        sink.check(0, &r.name, r.passed(), r.instances, 0.0);
    }
    Ok(sink.rows)
}

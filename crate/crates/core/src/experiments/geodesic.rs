//! Experiments that solve for passage times and geodesics from `0` to `n·e₁`.

use std::sync::Arc;

use super::output::{ResultRow, RowSink, BOUNDARY_FLAG_THRESHOLD};
use super::{pad_size, padded_box, replicate, replication_seed, CheapPathMode, ExperimentConfig, ExperimentKind};
use crate::animals;
use crate::error::Result;
use crate::lattice::{BoxDomain, Vertex, WeightField};
use crate::shortest_path::{path_touches_boundary, PassageGraph};
use crate::stats::{self, jackknife, jackknife_variance, mean_estimate, CompensatedSum, Estimate};

struct Env {
    domain: BoxDomain,
    law: Arc<crate::EdgeWeightLaw>,
    kind: ExperimentKind,
    seed: u64,
    n: usize,
}

impl Env {
    fn new(cfg: &ExperimentConfig, kind: ExperimentKind, n: usize) -> Result<Self> {
        Ok(Self {
            domain: padded_box(cfg.d, n, cfg.pad_exponent)?,
            law: Arc::new(cfg.law.clone()),
            kind,
            seed: cfg.master_seed,
            n,
        })
    }

    fn field(&self, rep: usize) -> WeightField {
        let seed = replication_seed(self.seed, self.kind, self.n, rep);
        WeightField::with_shared_law(self.domain.clone(), Arc::clone(&self.law), seed)
    }

    fn target(&self) -> Vertex {
        Vertex::axis_point(0, self.n as i32)
    }
}

fn fraction(flags: impl Iterator<Item = bool>) -> f64 {
    let (hit, total) = flags.fold((0usize, 0usize), |(h, t), f| (h + f as usize, t + 1));
    if total == 0 {
        0.0
    } else {
        hit as f64 / total as f64
    }
}

fn push_boundary_flag(sink: &mut RowSink<'_>, n: usize, reps: usize, bf: f64) {
    sink.value(n, "boundary_flag", (bf > BOUNDARY_FLAG_THRESHOLD) as u8 as f64, reps, bf);
}

pub(super) fn run_variance_scaling(cfg: &ExperimentConfig, pool: &rayon::ThreadPool) -> Result<Vec<ResultRow>> {
    let kind = ExperimentKind::VarianceScaling;
    let mut sink = RowSink::new(kind.name(), cfg.master_seed);
    let reps = cfg.replications;
    let mut scaled = Vec::new();
    let mut per_n = Vec::new();
    for &n in &cfg.n_values {
        let env = Env::new(cfg, kind, n)?;
        let samples = replicate(pool, reps, |rep| {
            let f = env.field(rep);
            let g = PassageGraph::new(&f);
            let (tau, path) = g.tau_and_geodesic(Vertex::ORIGIN, env.target())?;
            Ok((tau, path_touches_boundary(&env.domain, &path)))
        })?;
        let taus: Vec<f64> = samples.iter().map(|s| s.0).collect();
        let bf = fraction(samples.iter().map(|s| s.1));
        let nf = n as f64;
        let var = jackknife_variance(&taus);
        let log_scaled = var.scaled(nf.ln() / nf);
        let linear = var.scaled(1.0 / nf);
        sink.push(n, "mean", mean_estimate(&taus), reps, bf);
        sink.push(n, "var", var, reps, bf);
        sink.push(n, "var_over_n", linear, reps, bf);
        sink.push(n, "var_log_n_over_n", log_scaled, reps, bf);
        push_boundary_flag(&mut sink, n, reps, bf);
        scaled.push(log_scaled);
        per_n.push((n, linear, bf));
    }
    if per_n.len() >= 2 {
        let &(n_last, last, bf) = per_n.last().unwrap();
        let trend = scaled.windows(2).all(|w| w[1].value <= w[0].value + 2.0 * w[0].combined_err(&w[1]));
        sink.check(n_last, "var_log_n_over_n_nonincreasing", trend, reps, bf);
        let first = per_n[0].1;
        let drop = first.value - last.value >= 2.0 * first.combined_err(&last);
        sink.check(n_last, "var_over_n_decreases", drop, reps, bf);
    }
    Ok(sink.rows)
}

pub(super) fn run_fm_compare(cfg: &ExperimentConfig, pool: &rayon::ThreadPool) -> Result<Vec<ResultRow>> {
    let kind = ExperimentKind::FmCompare;
    let mut sink = RowSink::new(kind.name(), cfg.master_seed);
    let reps = cfg.replications;
    let d = cfg.d;
    let mut ratios = Vec::new();
    for &n in &cfg.n_values {
        let env = Env::new(cfg, kind, n)?;
        let m = super::lattice_radius(n) as i32;
        debug_assert!(pad_size(n, cfg.pad_exponent) as i32 >= m);
        let cube = BoxDomain::cube(d, -m, m)?;
        let shifts: Vec<Vertex> = (0..cube.num_vertices()).map(|i| cube.vertex_at(i)).collect();
        let samples = replicate(pool, reps, |rep| {
            let f = env.field(rep);
            let g = PassageGraph::new(&f);
            let (tau, path) = g.tau_and_geodesic(Vertex::ORIGIN, env.target())?;
            let mut acc = CompensatedSum::new();
            for &z in &shifts {
                acc.add(g.passage_time(z, z + env.target())?);
            }
            Ok((tau, acc.value() / shifts.len() as f64, path_touches_boundary(&env.domain, &path)))
        })?;
        let bf = fraction(samples.iter().map(|s| s.2));
        let taus: Vec<f64> = samples.iter().map(|s| s.0).collect();
        let fms: Vec<f64> = samples.iter().map(|s| s.1).collect();
        let pairs: Vec<(f64, f64)> = samples.iter().map(|s| (s.0, s.1)).collect();
        let diff = jackknife(&pairs, |p| {
            let (a, b): (Vec<f64>, Vec<f64>) = p.iter().copied().unzip();
            stats::variance(&a) - stats::variance(&b)
        });
        let abs_diff = Estimate {
            value: diff.value.abs(),
            std_err: diff.std_err,
        };
        let ratio = abs_diff.scaled(1.0 / (n as f64).powf(0.75));
        sink.value(n, "m", m as f64, reps, bf);
        sink.push(n, "var_tau", jackknife_variance(&taus), reps, bf);
        sink.push(n, "var_fm", jackknife_variance(&fms), reps, bf);
        sink.push(n, "abs_var_diff", abs_diff, reps, bf);
        sink.push(n, "abs_var_diff_over_n34", ratio, reps, bf);
        push_boundary_flag(&mut sink, n, reps, bf);
        ratios.push((n, ratio, bf));
    }
    if ratios.len() >= 2 {
        let &(n_last, last, bf) = ratios.last().unwrap();
        let earlier = &ratios[..ratios.len() - 1];
        let (_, peak, _) = earlier
            .iter()
            .copied()
            .max_by(|a, b| a.1.value.total_cmp(&b.1.value))
            .unwrap();
        let bounded = last.value <= peak.value + 2.0 * peak.combined_err(&last);
        sink.check(n_last, "fm_ratio_bounded", bounded, reps, bf);
    }
    Ok(sink.rows)
}

/// Relative spread `(max − min) / min` of a positive sequence.
pub(crate) fn relative_spread(values: &[f64]) -> f64 {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (hi - lo) / lo
}

pub const LENGTH_SPREAD_LIMIT: f64 = 0.15;

pub(super) fn run_geo_length(cfg: &ExperimentConfig, pool: &rayon::ThreadPool) -> Result<Vec<ResultRow>> {
    let kind = ExperimentKind::GeoLength;
    let mut sink = RowSink::new(kind.name(), cfg.master_seed);
    let reps = cfg.replications;
    let mut lengths = Vec::new();
    for &n in &cfg.n_values {
        let env = Env::new(cfg, kind, n)?;
        let probe = probe_box(cfg.d, n)?;
        let diam = super::lattice_radius(n) as f64;
        let samples = replicate(pool, reps, |rep| {
            let f = env.field(rep);
            let g = PassageGraph::new(&f);
            let r = g.geodesic_report(Vertex::ORIGIN, env.target())?;
            let hits = r.one_path.iter().filter(|e| probe.contains_edge(**e)).count();
            Ok((
                r.one_path.len() as f64,
                r.geo_intersection.len() as f64,
                hits as f64,
                path_touches_boundary(&env.domain, &r.one_path),
            ))
        })?;
        let bf = fraction(samples.iter().map(|s| s.3));
        let len: Vec<f64> = samples.iter().map(|s| s.0).collect();
        let geo: Vec<f64> = samples.iter().map(|s| s.1).collect();
        let hits: Vec<f64> = samples.iter().map(|s| s.2).collect();
        let nf = n as f64;
        let len_est = mean_estimate(&len);
        sink.push(n, "geodesic_length", len_est, reps, bf);
        sink.push(n, "geodesic_length_over_n", len_est.scaled(1.0 / nf), reps, bf);
        let geo_est = mean_estimate(&geo);
        sink.push(n, "geo_count", geo_est, reps, bf);
        sink.push(n, "geo_count_over_n", geo_est.scaled(1.0 / nf), reps, bf);
        sink.push(n, "probe_intersection_over_diam", mean_estimate(&hits).scaled(1.0 / diam), reps, bf);
        push_boundary_flag(&mut sink, n, reps, bf);
        lengths.push((n, len_est.value / nf, bf));
    }
    if lengths.len() >= 2 {
        let &(n_last, _, bf) = lengths.last().unwrap();
        let spread = relative_spread(&lengths.iter().map(|l| l.1).collect::<Vec<_>>());
        sink.value(n_last, "geodesic_length_over_n_spread", spread, reps, bf);
        sink.check(n_last, "geodesic_length_stable", spread < LENGTH_SPREAD_LIMIT, reps, bf);
    }
    Ok(sink.rows)
}

/// Box of side `m = ⌊n^{1/4}⌋` centred on the midpoint of `[0, n·e₁]`.
fn probe_box(d: usize, n: usize) -> Result<BoxDomain> {
    let m = super::lattice_radius(n) as i32;
    let half = m / 2;
    let mut lo = vec![-half; d];
    let mut hi = vec![m - half; d];
    lo[0] += n as i32 / 2;
    hi[0] += n as i32 / 2;
    BoxDomain::new(d, &lo, &hi)
}

pub const LOW_DENSITY_SPAN_LIMIT: f64 = 3.0;
const DYADIC_LEVELS: u32 = 10;

pub(super) fn run_low_density(cfg: &ExperimentConfig, pool: &rayon::ThreadPool) -> Result<Vec<ResultRow>> {
    let kind = ExperimentKind::LowDensity;
    let mut sink = RowSink::new(kind.name(), cfg.master_seed);
    let reps = cfg.replications;
    let eps = cfg.epsilons();
    let alpha = cfg.alpha();
    let exponent = (alpha - 1.0) / (alpha * cfg.d as f64);
    let law = &cfg.law;
    let inf = law.infimum();
    let masses: Vec<f64> = eps.iter().map(|e| law.cdf(inf + e) - law.cdf_left(inf)).collect();
    for &n in &cfg.n_values {
        let env = Env::new(cfg, kind, n)?;
        let samples = replicate(pool, reps, |rep| {
            let f = env.field(rep);
            let g = PassageGraph::new(&f);
            let (_, path) = g.tau_and_geodesic(Vertex::ORIGIN, env.target())?;
            let weights = path.iter().map(|e| g.weight(*e)).collect::<Result<Vec<f64>>>()?;
            let counts: Vec<f64> = eps
                .iter()
                .map(|e| weights.iter().filter(|t| **t >= inf && **t <= inf + e).count() as f64)
                .collect();
            Ok((counts, path_touches_boundary(&env.domain, &path)))
        })?;
        let bf = fraction(samples.iter().map(|s| s.1));
        let mut ratios = Vec::new();
        for (i, e) in eps.iter().enumerate() {
            let c: Vec<f64> = samples.iter().map(|s| s.0[i]).collect();
            let count = mean_estimate(&c);
            sink.push(n, format!("count_eps={e}"), count, reps, bf);
            sink.value(n, format!("mu_eps={e}"), masses[i], reps, bf);
            if masses[i] > 0.0 {
                let ratio = count.scaled(1.0 / (n as f64 * masses[i].powf(exponent)));
                sink.push(n, format!("ratio_eps={e}"), ratio, reps, bf);
                ratios.push(ratio.value);
            }
        }
        for i in 1..=DYADIC_LEVELS {
            let x = law.quantile(0.5f64.powi(i as i32))?;
            sink.value(n, format!("dyadic_x_{i}"), x, reps, bf);
        }
        push_boundary_flag(&mut sink, n, reps, bf);
        if ratios.len() >= 2 {
            let lo = ratios.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let span = hi / lo;
            sink.value(n, "ratio_span", span, reps, bf);
            sink.check(n, "low_density_ratio_span", span < LOW_DENSITY_SPAN_LIMIT, reps, bf);
        }
    }
    Ok(sink.rows)
}

pub(super) fn run_cheap_path(cfg: &ExperimentConfig, pool: &rayon::ThreadPool) -> Result<Vec<ResultRow>> {
    let kind = ExperimentKind::CheapPath;
    let mut sink = RowSink::new(kind.name(), cfg.master_seed);
    let reps = cfg.replications;
    let a = cfg.a();
    let budget = if cfg.d == 2 { animals::MAX_N_2D } else { animals::MAX_N_3D };
    let mut probs = Vec::new();
    for &n in &cfg.n_values {
        let exact = match cfg.cheap_path_mode() {
            CheapPathMode::Exact => true,
            CheapPathMode::Geodesic => false,
            CheapPathMode::Auto => n <= budget,
        };
        let threshold = a * n as f64;
        let (hits, bf, name) = if exact {
            let dom = BoxDomain::cube(cfg.d, -(n as i32), n as i32)?;
            let law = Arc::new(cfg.law.clone());
            let hits = replicate(pool, reps, |rep| {
                let seed = replication_seed(cfg.master_seed, kind, n, rep);
                let f = WeightField::with_shared_law(dom.clone(), Arc::clone(&law), seed);
                Ok(animals::cheap_path_exists(&f, n, threshold)? as u8 as f64)
            })?;
            (hits, 0.0, "p_hat")
        } else {
            let env = Env::new(cfg, kind, n)?;
            let strict = threshold - 1e-9 * threshold.abs().max(1.0);
            let samples = replicate(pool, reps, |rep| {
                let f = env.field(rep);
                let g = PassageGraph::new(&f);
                let (_, path) = g.tau_and_geodesic(Vertex::ORIGIN, env.target())?;
                let mut cost = CompensatedSum::new();
                for e in path.iter().take(n) {
                    cost.add(g.weight(*e)?);
                }
                Ok(((cost.value() < strict) as u8 as f64, path_touches_boundary(&env.domain, &path)))
            })?;
            let bf = fraction(samples.iter().map(|s| s.1));
            (samples.into_iter().map(|s| s.0).collect(), bf, "p_hat_lower")
        };
        let p = mean_estimate(&hits);
        sink.push(n, name, p, reps, bf);
        let nf = n as f64;
        let rate = if p.value > 0.0 {
            Estimate {
                value: -p.value.ln() / nf,
                std_err: p.std_err / (p.value * nf),
            }
        } else {
            Estimate {
                value: f64::INFINITY,
                std_err: f64::INFINITY,
            }
        };
        sink.push(n, "neg_log_p_over_n", rate, reps, bf);
        if !exact {
            push_boundary_flag(&mut sink, n, reps, bf);
        }
        probs.push((n, p.value, bf));
    }
    if probs.len() >= 2 {
        let &(n_last, last, bf) = probs.last().unwrap();
        let decreasing = probs.windows(2).all(|w| w[1].1 < w[0].1);
        sink.check(n_last, "cheap_path_decreasing", decreasing, reps, bf);
        sink.check(n_last, "cheap_path_halving", last < probs[0].1 / 2.0, reps, bf);
    }
    Ok(sink.rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spread_and_probe() {
        assert!((relative_spread(&[1.0, 1.1, 1.05]) - 0.1).abs() < 1e-12);
        let b = probe_box(2, 64).unwrap();
        assert_eq!(b.lo(), Vertex::new2(31, -1));
        assert_eq!(b.hi(), Vertex::new2(33, 1));
    }
}

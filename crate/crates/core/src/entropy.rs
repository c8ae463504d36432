//! Exact entropy inequalities on finite, fully enumerable probability spaces.
//!
//! Random variables are plain value arrays indexed like the outcomes of the
//! space they live on. Product spaces use mixed-radix indexing with the first
//! factor as the most significant digit, so conditioning on the first `k`
//! factors is a block average over contiguous ranges.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::{BoxDomain, Vertex};
use crate::rng::KeyedStream;
use crate::shortest_path::PassageGraph;
use crate::stats::CompensatedSum;

pub const DEFAULT_TOLERANCE: f64 = 1e-10;
pub const TIGHT_TOLERANCE: f64 = 1e-12;
/// Largest configuration count a mini-environment may enumerate.
pub const MAX_CONFIGS: usize = 43_046_721; // 3^16
pub const MAX_MINI_EDGES: usize = 16;
pub const MAX_MINI_ATOMS: usize = 3;

/// Outcome of one inequality check. `slack ≥ −tolerance` means it holds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Check {
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Check {
    /// Check of `lhs ≤ rhs`.
    pub fn le(lhs: f64, rhs: f64, tolerance: f64) -> Self {
        let slack = rhs - lhs;
        Self {
            lhs,
            rhs,
            slack,
            tolerance,
            pass: slack >= -tolerance,
        }
    }

    /// Check of `lhs ≥ rhs`.
    pub fn ge(lhs: f64, rhs: f64, tolerance: f64) -> Self {
        let slack = lhs - rhs;
        Self {
            lhs,
            rhs,
            slack,
            tolerance,
            pass: slack >= -tolerance,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FiniteDist {
    outcomes: Vec<f64>,
    probs: Vec<f64>,
}

impl FiniteDist {
    pub fn new(outcomes: Vec<f64>, probs: Vec<f64>) -> Result<Self> {
        if outcomes.is_empty() || outcomes.len() != probs.len() {
            return Err(Error::InvalidLaw("outcomes and probs must be nonempty and of equal length".into()));
        }
        if probs.iter().any(|p| !(*p > 0.0)) {
            return Err(Error::InvalidLaw("all probabilities must be positive".into()));
        }
        let total: f64 = probs.iter().copied().collect::<CompensatedSum>().value();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidLaw(format!("probabilities sum to {total}, not 1")));
        }
        if outcomes.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidLaw("outcomes must be finite".into()));
        }
        Ok(Self { outcomes, probs })
    }

    pub fn uniform(outcomes: Vec<f64>) -> Result<Self> {
        let n = outcomes.len();
        Self::new(outcomes, vec![1.0 / n as f64; n])
    }

    /// Uniform law on {0, 1}.
    pub fn fair_coin() -> Self {
        Self::uniform(vec![0.0, 1.0]).unwrap()
    }

    pub fn outcomes(&self) -> &[f64] {
        &self.outcomes
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn infimum(&self) -> f64 {
        self.outcomes.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// `P(X ≤ a)`.
    pub fn cdf(&self, a: f64) -> f64 {
        self.mass_where(|x| x <= a)
    }

    /// `P(X < a)`.
    pub fn cdf_left(&self, a: f64) -> f64 {
        self.mass_where(|x| x < a)
    }

    fn mass_where(&self, pred: impl Fn(f64) -> bool) -> f64 {
        self.outcomes
            .iter()
            .zip(&self.probs)
            .filter(|(x, _)| pred(**x))
            .map(|(_, p)| *p)
            .collect::<CompensatedSum>()
            .value()
    }
}

/// `E X` for values indexed like `probs`.
pub fn expectation(probs: &[f64], x: &[f64]) -> f64 {
    probs.iter().zip(x).map(|(p, v)| p * v).collect::<CompensatedSum>().value()
}

fn x_log_x(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * x.ln()
    }
}

/// `Ent(X) = E X log X − E X log E X`, with `0 log 0 = 0`.
pub fn entropy(probs: &[f64], x: &[f64]) -> Result<f64> {
    if probs.len() != x.len() {
        return Err(Error::Precondition("values and probabilities differ in length".into()));
    }
    if let Some(v) = x.iter().find(|v| !(**v >= 0.0)) {
        return Err(Error::OutOfRange(format!("entropy needs X >= 0, found {v}")));
    }
    let mean = expectation(probs, x);
    if mean == 0.0 {
        return Ok(0.0);
    }
    let exlx: f64 = probs.iter().zip(x).map(|(p, v)| p * x_log_x(*v)).collect::<CompensatedSum>().value();
    Ok(exlx - x_log_x(mean))
}

/// `E XY ≤ Ent X` whenever `E e^Y ≤ 1`.
pub fn variational_check(probs: &[f64], x: &[f64], y: &[f64]) -> Result<Check> {
    let eey = expectation(probs, &y.iter().map(|v| v.exp()).collect::<Vec<_>>());
    if eey > 1.0 + 1e-12 {
        return Err(Error::Precondition(format!("need E e^Y <= 1, got {eey}")));
    }
    let ent = entropy(probs, x)?;
    let exy = expectation(probs, &x.iter().zip(y).map(|(a, b)| a * b).collect::<Vec<_>>());
    Ok(Check::le(exy, ent, DEFAULT_TOLERANCE))
}

/// `Ent(X²) ≥ E X² log(E X² / (E X)²)`.
pub fn fs_lower_bound_check(probs: &[f64], x: &[f64]) -> Result<Check> {
    if let Some(v) = x.iter().find(|v| !(**v >= 0.0)) {
        return Err(Error::OutOfRange(format!("need X >= 0, found {v}")));
    }
    let x2: Vec<f64> = x.iter().map(|v| v * v).collect();
    let lhs = entropy(probs, &x2)?;
    let ex = expectation(probs, x);
    let ex2 = expectation(probs, &x2);
    let rhs = if ex2 == 0.0 { 0.0 } else { ex2 * (ex2 / (ex * ex)).ln() };
    Ok(Check::ge(lhs, rhs, DEFAULT_TOLERANCE))
}

/// `Ent_ν f² ≤ ½ (f(1) − f(0))²` for the fair coin `ν`.
pub fn bonami_gross_check(f0: f64, f1: f64) -> Check {
    let lhs = entropy(&[0.5, 0.5], &[f0 * f0, f1 * f1]).expect("squares are nonnegative");
    let rhs = 0.5 * (f1 - f0) * (f1 - f0);
    Check::le(lhs, rhs, TIGHT_TOLERANCE)
}

/// `−F(y⁻) log F(y⁻) ≤ −Σ_{a ∈ [I, y)} P(a) log F(a)`.
pub fn ibp_check(law: &FiniteDist, y: f64) -> Result<Check> {
    let inf = law.infimum();
    if !(y > inf) {
        return Err(Error::OutOfRange(format!("need y > I = {inf}, got {y}")));
    }
    let fy = law.cdf_left(y);
    let lhs = -x_log_x(fy);
    let rhs = law
        .outcomes()
        .iter()
        .zip(law.probs())
        .filter(|(a, _)| **a >= inf && **a < y)
        .map(|(a, p)| -law.cdf(*a).ln() * p)
        .collect::<CompensatedSum>()
        .value();
    Ok(Check::le(lhs, rhs, TIGHT_TOLERANCE))
}

/// Finite product of independent factors, first factor most significant.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductSpace {
    factors: Vec<FiniteDist>,
    radix: Vec<usize>,
    /// `stride[i]` = number of configurations per value of digit `i`.
    stride: Vec<usize>,
    size: usize,
}

impl ProductSpace {
    pub fn new(factors: Vec<FiniteDist>) -> Result<Self> {
        let radix: Vec<usize> = factors.iter().map(|f| f.len()).collect();
        let mut size = 1usize;
        for &r in &radix {
            size = size
                .checked_mul(r)
                .filter(|s| *s <= MAX_CONFIGS)
                .ok_or_else(|| Error::Budget(format!("product space exceeds {MAX_CONFIGS} configurations")))?;
        }
        let mut stride = vec![1; radix.len()];
        for i in (0..radix.len().saturating_sub(1)).rev() {
            stride[i] = stride[i + 1] * radix[i + 1];
        }
        Ok(Self {
            factors,
            radix,
            stride,
            size,
        })
    }

    pub fn iid(dist: &FiniteDist, k: usize) -> Result<Self> {
        Self::new(vec![dist.clone(); k])
    }

    pub fn num_factors(&self) -> usize {
        self.factors.len()
    }

    pub fn num_configs(&self) -> usize {
        self.size
    }

    pub fn factor(&self, i: usize) -> &FiniteDist {
        &self.factors[i]
    }

    pub fn digit(&self, config: usize, i: usize) -> usize {
        (config / self.stride[i]) % self.radix[i]
    }

    /// Coordinate values of a configuration.
    pub fn values(&self, config: usize) -> Vec<f64> {
        (0..self.factors.len())
            .map(|i| self.factors[i].outcomes[self.digit(config, i)])
            .collect()
    }

    /// Probability of every configuration.
    pub fn probs(&self) -> Vec<f64> {
        self.prefix_probs(self.factors.len())
    }

    /// Probabilities of the configurations of the first `k` factors.
    pub fn prefix_probs(&self, k: usize) -> Vec<f64> {
        let mut p = vec![1.0];
        for f in &self.factors[..k] {
            p = p.iter().flat_map(|a| f.probs.iter().map(move |b| a * b)).collect();
        }
        p
    }

    /// Tabulate a function of the coordinate values.
    pub fn tabulate(&self, g: impl Fn(&[f64]) -> f64) -> Vec<f64> {
        (0..self.size).map(|c| g(&self.values(c))).collect()
    }
}

/// `Ent(X) ≤ Σ_i E[Ent_i X]` on a product space.
pub fn tensorization_check(space: &ProductSpace, x: &[f64]) -> Result<Check> {
    if x.len() != space.num_configs() {
        return Err(Error::Precondition("X must have one value per configuration".into()));
    }
    let probs = space.probs();
    let lhs = entropy(&probs, x)?;
    let mut rhs = CompensatedSum::default();
    for i in 0..space.num_factors() {
        let f = space.factor(i);
        let stride = space.stride[i];
        let mut slice = vec![0.0; f.len()];
        for base in 0..space.num_configs() {
            if space.digit(base, i) != 0 {
                continue;
            }
            // probability of the other coordinates = P(config) / P(digit i = 0)
            let p_rest = probs[base] / f.probs[0];
            for (d, s) in slice.iter_mut().enumerate() {
                *s = x[base + d * stride];
            }
            rhs.add(p_rest * entropy(&f.probs, &slice)?);
        }
    }
    Ok(Check::le(lhs, rhs.value(), DEFAULT_TOLERANCE))
}

/// The Doob martingale of `G` along the factor order.
#[derive(Debug, Clone, Serialize)]
pub struct MartingaleTable {
    /// `v[k-1][prefix]` is `V_k` on the atom of `F_k` indexed by `prefix`.
    pub v: Vec<Vec<f64>>,
    pub mean: f64,
    pub var_f: f64,
    pub sum_e_vk2: f64,
    pub sum_e_abs_vk_sq: f64,
    pub sum_ent_vk2: f64,
    /// `max_k max_prefix |E[V_k | F_{k−1}]|`.
    pub max_conditional_mean: f64,
}

impl MartingaleTable {
    /// `|Var G − Σ E V_k²|`.
    pub fn orthogonality_gap(&self) -> f64 {
        (self.var_f - self.sum_e_vk2).abs()
    }

    pub fn orthogonality_check(&self, tolerance: f64) -> Check {
        let mut c = Check::le(self.var_f, self.sum_e_vk2, tolerance);
        c.slack = -self.orthogonality_gap();
        c.pass = self.orthogonality_gap() <= tolerance;
        c
    }

    /// `Σ Ent(V_k²) ≥ Var G · log(Var G / Σ (E|V_k|)²)`; `None` if `Var G = 0`.
    pub fn lower_bound_check(&self) -> Option<Check> {
        if self.var_f <= 0.0 || self.sum_e_abs_vk_sq <= 0.0 {
            return None;
        }
        let rhs = self.var_f * (self.var_f / self.sum_e_abs_vk_sq).ln();
        Some(Check::ge(self.sum_ent_vk2, rhs, DEFAULT_TOLERANCE))
    }
}

pub fn martingale_decompose(space: &ProductSpace, g: &[f64]) -> Result<MartingaleTable> {
    if g.len() != space.num_configs() {
        return Err(Error::Precondition("G must have one value per configuration".into()));
    }
    let k_max = space.num_factors();
    // cond[k] = E[G | F_k] on prefixes of length k
    let mut cond: Vec<Vec<f64>> = vec![Vec::new(); k_max + 1];
    cond[k_max] = g.to_vec();
    for k in (0..k_max).rev() {
        let f = space.factor(k);
        let r = f.len();
        cond[k] = cond[k + 1]
            .chunks_exact(r)
            .map(|block| block.iter().zip(&f.probs).map(|(v, p)| v * p).collect::<CompensatedSum>().value())
            .collect();
    }
    let mean = cond[0][0];
    let probs = space.probs();
    let var_f = probs
        .iter()
        .zip(g)
        .map(|(p, v)| p * (v - mean) * (v - mean))
        .collect::<CompensatedSum>()
        .value();

    let mut v = Vec::with_capacity(k_max);
    let mut sum_e_vk2 = CompensatedSum::default();
    let mut sum_e_abs_sq = CompensatedSum::default();
    let mut sum_ent = CompensatedSum::default();
    let mut max_cond_mean = 0f64;
    for k in 1..=k_max {
        let r = space.factor(k - 1).len();
        let vk: Vec<f64> = cond[k]
            .iter()
            .enumerate()
            .map(|(prefix, c)| c - cond[k - 1][prefix / r])
            .collect();
        let pk = space.prefix_probs(k);
        let fp = &space.factor(k - 1).probs;
        for block in vk.chunks_exact(r) {
            let m = block.iter().zip(fp).map(|(a, p)| a * p).collect::<CompensatedSum>().value();
            max_cond_mean = max_cond_mean.max(m.abs());
        }
        let vk2: Vec<f64> = vk.iter().map(|a| a * a).collect();
        sum_e_vk2.add(expectation(&pk, &vk2));
        let e_abs = expectation(&pk, &vk.iter().map(|a| a.abs()).collect::<Vec<_>>());
        sum_e_abs_sq.add(e_abs * e_abs);
        sum_ent.add(entropy(&pk, &vk2)?);
        v.push(vk);
    }
    Ok(MartingaleTable {
        v,
        mean,
        var_f,
        sum_e_vk2: sum_e_vk2.value(),
        sum_e_abs_vk_sq: sum_e_abs_sq.value(),
        sum_ent_vk2: sum_ent.value(),
        max_conditional_mean: max_cond_mean,
    })
}

/// A box small enough to enumerate every weight configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct MiniEnvironment {
    domain: BoxDomain,
    dist: FiniteDist,
    x: Vertex,
    y: Vertex,
}

impl MiniEnvironment {
    pub fn new(domain: BoxDomain, dist: FiniteDist, x: Vertex, y: Vertex) -> Result<Self> {
        let m = domain.num_edges();
        if m > MAX_MINI_EDGES {
            return Err(Error::Budget(format!("{m} edges exceed the limit of {MAX_MINI_EDGES}")));
        }
        if dist.len() > MAX_MINI_ATOMS {
            return Err(Error::Budget(format!("{} atoms exceed the limit of {MAX_MINI_ATOMS}", dist.len())));
        }
        if dist.outcomes().iter().any(|a| *a < 0.0) {
            return Err(Error::InvalidLaw("edge weights must be nonnegative".into()));
        }
        domain.require_vertex(x)?;
        domain.require_vertex(y)?;
        Ok(Self { domain, dist, x, y })
    }

    pub fn domain(&self) -> &BoxDomain {
        &self.domain
    }

    /// One factor per edge, in canonical edge order.
    pub fn space(&self) -> Result<ProductSpace> {
        ProductSpace::iid(&self.dist, self.domain.num_edges())
    }

    /// `τ(x, y)` for every configuration.
    pub fn passage_times(&self) -> Result<Vec<f64>> {
        let space = self.space()?;
        let slots: Vec<usize> = self.domain.edges().map(|e| self.domain.slot(e).unwrap()).collect();
        let mut raw = vec![f64::NAN; self.domain.num_slots()];
        let mut out = Vec::with_capacity(space.num_configs());
        for c in 0..space.num_configs() {
            for (i, &s) in slots.iter().enumerate() {
                raw[s] = self.dist.outcomes()[space.digit(c, i)];
            }
            let g = PassageGraph::from_raw(self.domain.clone(), &raw);
            out.push(g.passage_time(self.x, self.y)?);
        }
        Ok(out)
    }
}

/// Aggregate of one randomized check family.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteResult {
    pub name: String,
    pub instances: usize,
    pub failures: usize,
    pub min_slack: f64,
}

impl SuiteResult {
    fn new(name: &str) -> Self {
        Self {
            name: name.to_string(),
            instances: 0,
            failures: 0,
            min_slack: f64::INFINITY,
        }
    }

    fn record(&mut self, c: &Check) {
        self.instances += 1;
        if !c.pass {
            self.failures += 1;
        }
        self.min_slack = self.min_slack.min(c.slack);
    }

    pub fn passed(&self) -> bool {
        self.instances > 0 && self.failures == 0
    }
}

fn random_probs(s: &mut KeyedStream, k: usize) -> Vec<f64> {
    let w: Vec<f64> = (0..k).map(|_| s.range(0.05, 1.0)).collect();
    let t: f64 = w.iter().sum();
    let mut p: Vec<f64> = w.iter().map(|v| v / t).collect();
    let head: f64 = p[..k - 1].iter().sum();
    p[k - 1] = 1.0 - head;
    p
}

fn random_nonneg(s: &mut KeyedStream, k: usize) -> Vec<f64> {
    (0..k)
        .map(|_| if s.below(5) == 0 { 0.0 } else { s.range(0.0, 5.0) })
        .collect()
}

fn random_dist(s: &mut KeyedStream, k: usize) -> FiniteDist {
    let mut outcomes: Vec<f64> = Vec::with_capacity(k);
    while outcomes.len() < k {
        let a = (s.range(0.0, 4.0) * 4.0).round() / 4.0;
        if !outcomes.contains(&a) {
            outcomes.push(a);
        }
    }
    FiniteDist::new(outcomes, random_probs(s, k)).unwrap()
}

/// A random small FPP environment with at most 4096 configurations.
pub fn random_mini_environment(s: &mut KeyedStream) -> MiniEnvironment {
    let shapes: [(&[i32], usize); 5] = [(&[1, 1], 3), (&[1, 2], 3), (&[2, 2], 2), (&[1, 3], 2), (&[1, 4], 2)];
    let (hi, atoms) = shapes[s.below(shapes.len() as u64) as usize];
    let dom = BoxDomain::new(2, &[0, 0], hi).unwrap();
    let mut dist = random_dist(s, atoms);
    if dist.outcomes().iter().all(|a| *a == 0.0) {
        dist = FiniteDist::uniform(vec![1.0, 2.0]).unwrap();
    }
    let nv = dom.num_vertices() as u64;
    let x = dom.vertex_at(s.below(nv) as usize);
    let mut y = dom.vertex_at(s.below(nv) as usize);
    if y == x {
        y = dom.hi();
        if y == x {
            y = dom.lo();
        }
    }
    MiniEnvironment::new(dom, dist, x, y).unwrap()
}

/// Randomized instances of every inequality plus the martingale identity
/// and lower bound on `environments` mini FPP environments.
pub fn run_suite(instances: usize, environments: usize, seed: u64) -> Result<Vec<SuiteResult>> {
    let mut s = KeyedStream::new(seed);
    let mut fs = SuiteResult::new("fs_lower_bound");
    let mut tens = SuiteResult::new("tensorization");
    let mut var = SuiteResult::new("variational");
    let mut bg = SuiteResult::new("bonami_gross");
    let mut ibp = SuiteResult::new("ibp");
    for _ in 0..instances {
        let p = random_probs(&mut s, 4);
        fs.record(&fs_lower_bound_check(&p, &random_nonneg(&mut s, 4))?);

        let k = 2 + s.below(3) as usize;
        let factors: Vec<FiniteDist> = (0..k)
            .map(|_| {
                let r = 2 + s.below(2) as usize;
                FiniteDist::new((0..r).map(|i| i as f64).collect(), random_probs(&mut s, r)).unwrap()
            })
            .collect();
        let space = ProductSpace::new(factors)?;
        let x = random_nonneg(&mut s, space.num_configs());
        tens.record(&tensorization_check(&space, &x)?);

        let p = random_probs(&mut s, 3);
        let x = random_nonneg(&mut s, 3);
        let y: Vec<f64> = if s.below(4) == 0 && expectation(&p, &x) > 0.0 {
            let m = expectation(&p, &x);
            x.iter().map(|v| if *v == 0.0 { -50.0 } else { (v / m).ln() }).collect()
        } else {
            let z: Vec<f64> = (0..3).map(|_| s.range(-3.0, 3.0)).collect();
            let ez = expectation(&p, &z.iter().map(|v| v.exp()).collect::<Vec<_>>());
            let shift = ez.ln() + s.range(0.0, 0.5) + 1e-15;
            z.iter().map(|v| v - shift).collect()
        };
        var.record(&variational_check(&p, &x, &y)?);

        bg.record(&bonami_gross_check(s.range(-10.0, 10.0), s.range(-10.0, 10.0)));

        let law = random_dist(&mut s, 5);
        let top = law.outcomes().iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let y = s.range(law.infimum(), top + 1.0).max(law.infimum() + 1e-9);
        ibp.record(&ibp_check(&law, y)?);
    }

    let mut ortho = SuiteResult::new("martingale_orthogonality");
    let mut lower = SuiteResult::new("martingale_lower_bound");
    let mut centered = SuiteResult::new("martingale_centered");
    for _ in 0..environments {
        let env = random_mini_environment(&mut s);
        let space = env.space()?;
        let g = env.passage_times()?;
        let t = martingale_decompose(&space, &g)?;
        let scale = t.var_f.max(1.0);
        ortho.record(&t.orthogonality_check(TIGHT_TOLERANCE * scale));
        centered.record(&Check::le(t.max_conditional_mean, 0.0, TIGHT_TOLERANCE * t.mean.abs().max(1.0)));
        if let Some(c) = t.lower_bound_check() {
            lower.record(&c);
        }
    }
    Ok(vec![fs, tens, var, bg, ibp, ortho, centered, lower])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{EdgeId, WeightField};
    use crate::shortest_path::passage_time;
    use crate::EdgeWeightLaw;
    use proptest::prelude::*;
    use std::f64::consts::{E, LN_2};

    const HALF: [f64; 2] = [0.5, 0.5];

    #[test]
    fn entropy_examples() {
        assert_eq!(entropy(&HALF, &[3.0, 3.0]).unwrap(), 0.0);
        assert!((entropy(&HALF, &[0.0, 2.0]).unwrap() - LN_2).abs() < 1e-15);
        let m = (1.0 + E) / 2.0;
        let expected = 0.5 * E - m * m.ln();
        assert!((entropy(&HALF, &[1.0, E]).unwrap() - expected).abs() < 1e-15);
        assert!(entropy(&HALF, &[-1.0, 1.0]).is_err());
        assert_eq!(entropy(&HALF, &[0.0, 0.0]).unwrap(), 0.0);
    }

    #[test]
    fn entropy_scaling_matches_direct_evaluation() {
        let mut s = KeyedStream::new(5);
        for _ in 0..200 {
            let p = random_probs(&mut s, 4);
            let x = random_nonneg(&mut s, 4);
            let c = s.range(0.01, 20.0);
            let cx: Vec<f64> = x.iter().map(|v| c * v).collect();
            let ex = expectation(&p, &x);
            let exlx = expectation(&p, &x.iter().map(|v| x_log_x(*v)).collect::<Vec<_>>());
            let via_formula = c * exlx + c * ex * c.ln() - x_log_x(c * ex);
            let direct = entropy(&p, &cx).unwrap();
            assert!((direct - via_formula).abs() < 1e-10 * direct.abs().max(1.0));
            assert!((direct - c * entropy(&p, &x).unwrap()).abs() < 1e-10 * direct.abs().max(1.0));
        }
    }

    #[test]
    fn variational_examples() {
        let p = [0.2, 0.5, 0.3];
        let x = [1.0, 2.0, 4.0];
        let c = variational_check(&p, &x, &[0.0; 3]).unwrap();
        assert_eq!(c.lhs, 0.0);
        assert!(c.pass);
        let m = expectation(&p, &x);
        let y: Vec<f64> = x.iter().map(|v| (v / m).ln()).collect();
        let c = variational_check(&p, &x, &y).unwrap();
        assert!(c.slack.abs() < 1e-10);
        assert!(variational_check(&p, &x, &[1.0; 3]).is_err());
    }

    #[test]
    fn fs_examples() {
        let c = fs_lower_bound_check(&HALF, &[2.0, 2.0]).unwrap();
        assert_eq!((c.lhs, c.rhs), (0.0, 0.0));
        let c = fs_lower_bound_check(&HALF, &[0.0, 1.0]).unwrap();
        assert!((c.lhs - 0.5 * LN_2).abs() < 1e-15);
        assert!((c.rhs - 0.5 * LN_2).abs() < 1e-15);
        assert!(fs_lower_bound_check(&HALF, &[-1.0, 1.0]).is_err());
    }

    #[test]
    fn bonami_gross_examples() {
        let c = bonami_gross_check(0.0, 1.0);
        assert!((c.lhs - LN_2 / 2.0).abs() < 1e-15);
        assert_eq!(c.rhs, 0.5);
        let c = bonami_gross_check(3.0, 3.0);
        assert_eq!((c.lhs, c.rhs), (0.0, 0.0));
    }

    #[test]
    fn ibp_examples() {
        let point = FiniteDist::new(vec![1.0], vec![1.0]).unwrap();
        let c = ibp_check(&point, 1.0 + 1e-9).unwrap();
        assert_eq!((c.lhs, c.rhs), (0.0, 0.0));
        let two = FiniteDist::uniform(vec![1.0, 2.0]).unwrap();
        let c = ibp_check(&two, 2.0).unwrap();
        assert!((c.lhs - 0.5 * LN_2).abs() < 1e-15);
        assert!((c.rhs - 0.5 * LN_2).abs() < 1e-15);
        assert!(ibp_check(&two, 1.0).is_err());
    }

    #[test]
    fn tensorization_examples() {
        let d = FiniteDist::new(vec![0.0, 1.0, 2.0], vec![0.2, 0.3, 0.5]).unwrap();
        let space = ProductSpace::iid(&d, 3).unwrap();
        let one = space.tabulate(|w| 1.0 + w[1] * w[1]);
        let c = tensorization_check(&space, &one).unwrap();
        assert!((c.lhs - c.rhs).abs() < 1e-14);
        let prod = space.tabulate(|w| (1.0 + w[0]) * (2.0 + w[1]) * (0.5 + w[2]));
        let c = tensorization_check(&space, &prod).unwrap();
        // independent product factors tensorize with equality
        assert!(c.pass && c.slack.abs() < 1e-12);
        let mixed = space.tabulate(|w| 1.0 + w[0] * w[1] + w[2]);
        let c = tensorization_check(&space, &mixed).unwrap();
        assert!(c.pass && c.slack > 1e-6);
        let c = tensorization_check(&space, &vec![2.0; space.num_configs()]).unwrap();
        assert_eq!((c.lhs, c.rhs), (0.0, 0.0));
    }

    #[test]
    fn martingale_single_coordinate() {
        let d = FiniteDist::new(vec![1.0, 2.0, 5.0], vec![0.2, 0.3, 0.5]).unwrap();
        let space = ProductSpace::iid(&d, 3).unwrap();
        let g = space.tabulate(|w| w[0] * w[0]);
        let t = martingale_decompose(&space, &g).unwrap();
        let mean = 0.2 + 0.3 * 4.0 + 0.5 * 25.0;
        for (i, &a) in [1.0f64, 4.0, 25.0].iter().enumerate() {
            assert!((t.v[0][i] - (a - mean)).abs() < 1e-12);
        }
        assert!(t.v[1].iter().chain(&t.v[2]).all(|v| v.abs() < 1e-12));
        assert!(t.orthogonality_gap() < 1e-12);
    }

    #[test]
    fn martingale_constant_is_vacuous() {
        let space = ProductSpace::iid(&FiniteDist::fair_coin(), 4).unwrap();
        let t = martingale_decompose(&space, &[7.0; 16]).unwrap();
        assert!(t.v.iter().flatten().all(|v| *v == 0.0));
        assert_eq!(t.var_f, 0.0);
        assert!(t.lower_bound_check().is_none());
    }

    /// Passage times on the 4-cycle, enumerated through the weight field and
    /// overrides rather than the mini-environment fast path.
    #[test]
    fn four_cycle_passage_time_martingale() {
        let dom = BoxDomain::cube(2, 0, 1).unwrap();
        let d = FiniteDist::uniform(vec![1.0, 2.0]).unwrap();
        let env = MiniEnvironment::new(dom.clone(), d.clone(), Vertex::new2(0, 0), Vertex::new2(1, 1)).unwrap();
        let g = env.passage_times().unwrap();
        let space = env.space().unwrap();
        let edges: Vec<EdgeId> = dom.edges().collect();
        let base = WeightField::new(dom, EdgeWeightLaw::constant(1.0).unwrap(), 0);
        for c in 0..space.num_configs() {
            let vals = space.values(c);
            let f = edges.iter().zip(&vals).fold(base.clone(), |f, (e, w)| f.with_override(*e, *w).unwrap());
            assert_eq!(g[c], passage_time(&f, Vertex::new2(0, 0), Vertex::new2(1, 1)).unwrap());
        }
        let t = martingale_decompose(&space, &g).unwrap();
        assert!(t.var_f > 0.0);
        assert!(t.orthogonality_gap() < 1e-12);
        assert!(t.lower_bound_check().unwrap().pass);
    }

    #[test]
    fn mini_environment_budget() {
        let d = FiniteDist::uniform(vec![1.0, 2.0]).unwrap();
        let big = BoxDomain::cube(2, 0, 3).unwrap();
        assert!(MiniEnvironment::new(big, d.clone(), Vertex::ORIGIN, Vertex::new2(1, 1)).is_err());
        let four = FiniteDist::uniform(vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let small = BoxDomain::cube(2, 0, 1).unwrap();
        assert!(MiniEnvironment::new(small, four, Vertex::ORIGIN, Vertex::new2(1, 1)).is_err());
    }

    #[test]
    fn suite_passes_small() {
        let results = run_suite(200, 10, 3).unwrap();
        for r in &results {
            assert!(r.passed(), "{r:?}");
        }
    }

    proptest! {
        #[test]
        fn bonami_gross_holds(f0 in -10.0f64..10.0, f1 in -10.0f64..10.0) {
            prop_assert!(bonami_gross_check(f0, f1).pass);
        }

        #[test]
        fn entropy_is_nonnegative(seed in any::<u64>()) {
            let mut s = KeyedStream::new(seed);
            let p = random_probs(&mut s, 5);
            let x = random_nonneg(&mut s, 5);
            prop_assert!(entropy(&p, &x).unwrap() >= -1e-12);
        }

        #[test]
        fn beyond_last_edge_increments_vanish(seed in any::<u64>()) {
            // G ignores the last two coordinates
            let mut s = KeyedStream::new(seed);
            let space = ProductSpace::iid(&FiniteDist::uniform(vec![0.0, 1.0, 3.0]).unwrap(), 5).unwrap();
            let table: Vec<f64> = (0..27).map(|_| s.range(-2.0, 2.0)).collect();
            let g = space.tabulate(|w| table[(w[0] as usize % 3) * 9 + (w[1] as usize % 3) * 3 + w[2] as usize % 3]);
            let t = martingale_decompose(&space, &g).unwrap();
            prop_assert!(t.v[3].iter().chain(&t.v[4]).all(|v| v.abs() < 1e-12));
            prop_assert!(t.orthogonality_gap() < 1e-12 * t.var_f.max(1.0));
        }
    }
}

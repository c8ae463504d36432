//! Self-avoiding paths from the origin, greedy lattice animals `N_n` and the
//! box cover of a lattice animal.

use std::collections::{BTreeSet, HashSet, VecDeque};

use rayon::prelude::*;
use serde::Serialize;

use crate::distributions::EdgeWeightLaw;
use crate::error::{Error, Result};
use crate::lattice::{BoxDomain, EdgeId, Vertex, WeightField};
use crate::rng::{hash_words, KeyedStream};
use crate::stats::{mean_estimate, Estimate};

pub const MAX_N_2D: usize = 14;
pub const MAX_N_3D: usize = 9;

fn check_budget(d: usize, n: usize) -> Result<()> {
    let max = match d {
        2 => MAX_N_2D,
        3 => MAX_N_3D,
        _ => return Err(Error::Dimension(d)),
    };
    if n > max {
        return Err(Error::Budget(format!("n = {n} exceeds the enumeration budget {max} for d = {d}")));
    }
    Ok(())
}

fn direction(d: usize, k: usize) -> (usize, i32) {
    debug_assert!(k < 2 * d);
    (k / 2, if k.is_multiple_of(2) { 1 } else { -1 })
}

/// All self-avoiding paths with `n` edges from the origin.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SawSet {
    d: usize,
    n: usize,
}

pub fn enumerate_saws(d: usize, n: usize) -> Result<SawSet> {
    check_budget(d, n)?;
    Ok(SawSet { d, n })
}

impl SawSet {
    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn len_edges(&self) -> usize {
        self.n
    }

    /// Paths as vertex sequences `v_0 = 0, …, v_n`.
    pub fn iter(&self) -> SawIter {
        SawIter::new(self.d, self.n)
    }
}

impl IntoIterator for &SawSet {
    type Item = Vec<Vertex>;
    type IntoIter = SawIter;
    fn into_iter(self) -> SawIter {
        self.iter()
    }
}

/// Depth-first enumeration with an explicit stack.
pub struct SawIter {
    d: usize,
    n: usize,
    side: usize,
    path: Vec<Vertex>,
    next_dir: Vec<usize>,
    visited: Vec<bool>,
    emitted: bool,
    done: bool,
}

impl SawIter {
    fn new(d: usize, n: usize) -> Self {
        let side = 2 * n + 1;
        let mut it = Self {
            d,
            n,
            side,
            path: vec![Vertex::ORIGIN],
            next_dir: vec![0],
            visited: vec![false; side.pow(d as u32)],
            emitted: false,
            done: false,
        };
        let o = it.cell(Vertex::ORIGIN);
        it.visited[o] = true;
        it
    }

    fn cell(&self, v: Vertex) -> usize {
        (0..self.d).fold(0, |acc, k| acc * self.side + (v.0[k] + self.n as i32) as usize)
    }

    fn backtrack(&mut self) {
        let v = self.path.pop().unwrap();
        let c = self.cell(v);
        self.visited[c] = false;
        self.next_dir.pop();
        self.emitted = false;
        if self.path.is_empty() {
            self.done = true;
        }
    }
}

impl Iterator for SawIter {
    type Item = Vec<Vertex>;

    fn next(&mut self) -> Option<Vec<Vertex>> {
        loop {
            if self.done {
                return None;
            }
            let depth = self.path.len() - 1;
            if depth == self.n {
                if !self.emitted {
                    self.emitted = true;
                    return Some(self.path.clone());
                }
                self.backtrack();
                continue;
            }
            let k = self.next_dir[depth];
            if k == 2 * self.d {
                self.backtrack();
                continue;
            }
            self.next_dir[depth] += 1;
            let (axis, sign) = direction(self.d, k);
            let w = self.path[depth].step(axis, sign);
            let c = self.cell(w);
            if self.visited[c] {
                continue;
            }
            self.visited[c] = true;
            self.path.push(w);
            self.next_dir.push(0);
        }
    }
}

/// Edges of a vertex path.
pub fn path_edges(path: &[Vertex]) -> Vec<EdgeId> {
    path.windows(2)
        .map(|w| EdgeId::between(w[0], w[1]).expect("consecutive vertices are neighbours"))
        .collect()
}

/// `{0,1}` edge values on `[−n, n]^d`, laid out by slot.
#[derive(Debug, Clone)]
pub struct BernoulliGrid {
    domain: BoxDomain,
    open: Vec<bool>,
}

impl BernoulliGrid {
    /// Read a `{0,1}`-valued field; its box must contain `[−n, n]^d`.
    pub fn from_field(field: &WeightField, n: usize) -> Result<Self> {
        let dom = field.domain();
        let d = dom.dim();
        let n = n as i32;
        let corner_lo = Vertex::from_slice(&vec![-n; d]);
        let corner_hi = Vertex::from_slice(&vec![n; d]);
        if !dom.contains(corner_lo) || !dom.contains(corner_hi) {
            return Err(Error::OutsideDomain(format!("field box must contain [-{n}, {n}]^{d}")));
        }
        let domain = BoxDomain::cube(d, -n, n)?;
        let mut open = vec![false; domain.num_slots()];
        for e in domain.edges() {
            let w = field.weight_of(e)?;
            if w != 0.0 && w != 1.0 {
                return Err(Error::OutOfRange(format!("Bernoulli field has value {w}")));
            }
            open[domain.slot(e).unwrap()] = w == 1.0;
        }
        Ok(Self { domain, open })
    }

    /// Bernoulli(`p`) field from the lattice generator.
    pub fn sample(d: usize, n: usize, p: f64, seed: u64) -> Result<Self> {
        let law = EdgeWeightLaw::bernoulli(p)?;
        let dom = BoxDomain::cube(d, -(n as i32), n as i32)?;
        Self::from_field(&WeightField::new(dom, law, seed), n)
    }

    pub fn is_open(&self, e: EdgeId) -> bool {
        self.domain.slot(e).is_some_and(|s| self.open[s])
    }

    pub fn set(&mut self, e: EdgeId, value: bool) -> Result<()> {
        let s = self.domain.require_slot(e)?;
        self.open[s] = value;
        Ok(())
    }

    fn radius(&self) -> usize {
        self.domain.hi().0[0] as usize
    }
}

/// `N_n` by depth-first search with the bound `current + remaining ≤ best`.
pub fn exact_nn(grid: &BernoulliGrid, n: usize) -> Result<usize> {
    let d = grid.domain.dim();
    check_budget(d, n)?;
    if n > grid.radius() {
        return Err(Error::OutsideDomain(format!("grid radius {} is smaller than n = {n}", grid.radius())));
    }
    struct Ctx<'a> {
        grid: &'a BernoulliGrid,
        n: usize,
        visited: Vec<bool>,
        best: usize,
    }
    fn dfs(ctx: &mut Ctx<'_>, v: usize, depth: usize, current: usize) {
        if depth == ctx.n {
            ctx.best = ctx.best.max(current);
            return;
        }
        if current + (ctx.n - depth) <= ctx.best {
            return;
        }
        let mut nbrs = [(0usize, 0usize); 6];
        let mut k = 0;
        ctx.grid.domain.for_each_neighbor(v, |w, slot| {
            nbrs[k] = (w, slot);
            k += 1;
        });
        // open edges first so good incumbents appear early
        nbrs[..k].sort_by_key(|&(_, s)| !ctx.grid.open[s]);
        for &(w, slot) in &nbrs[..k] {
            if ctx.visited[w] {
                continue;
            }
            ctx.visited[w] = true;
            dfs(ctx, w, depth + 1, current + ctx.grid.open[slot] as usize);
            ctx.visited[w] = false;
            if ctx.best == ctx.n {
                return;
            }
        }
    }
    let origin = grid.domain.vertex_index(Vertex::ORIGIN).unwrap();
    let mut ctx = Ctx {
        grid,
        n,
        visited: vec![false; grid.domain.num_vertices()],
        best: 0,
    };
    ctx.visited[origin] = true;
    dfs(&mut ctx, origin, 0, 0);
    Ok(ctx.best)
}

/// `N_n` by plain enumeration of every self-avoiding path.
pub fn plain_nn(grid: &BernoulliGrid, n: usize) -> Result<usize> {
    let saws = enumerate_saws(grid.domain.dim(), n)?;
    Ok(saws
        .iter()
        .map(|p| path_edges(&p).iter().filter(|e| grid.is_open(**e)).count())
        .max()
        .unwrap_or(0))
}

/// Seed of replication `rep` in a scaling-ratio run.
pub fn replication_seed(seed: u64, d: usize, n: usize, p: f64, rep: usize) -> u64 {
    hash_words(seed, &[d as u64, n as u64, p.to_bits(), rep as u64])
}

/// Monte Carlo estimate of `E_p N_n / (n p^{1/d})`.
pub fn scaling_ratio(d: usize, n: usize, p: f64, reps: usize, seed: u64) -> Result<Estimate> {
    check_budget(d, n)?;
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::OutOfRange(format!("p must lie in (0, 1], got {p}")));
    }
    if reps < 100 {
        return Err(Error::OutOfRange(format!("need at least 100 replications, got {reps}")));
    }
    if n == 0 {
        return Err(Error::OutOfRange("n must be positive".into()));
    }
    let samples: Vec<f64> = (0..reps)
        .into_par_iter()
        .map(|rep| {
            let grid = BernoulliGrid::sample(d, n, p, replication_seed(seed, d, n, p, rep))?;
            exact_nn(&grid, n).map(|v| v as f64)
        })
        .collect::<Result<_>>()?;
    Ok(mean_estimate(&samples).scaled(1.0 / (n as f64 * p.powf(1.0 / d as f64))))
}

/// Per-slot weights of the field on `[−n, n]^d` and the law's infimum.
fn saw_weights(field: &WeightField, n: usize) -> Result<(BoxDomain, Vec<f64>)> {
    let d = field.domain().dim();
    check_budget(d, n)?;
    let domain = BoxDomain::cube(d, -(n as i32), n as i32)?;
    for corner in [domain.lo(), domain.hi()] {
        if !field.domain().contains(corner) {
            return Err(Error::OutsideDomain(format!("field box must contain [-{n}, {n}]^{d}")));
        }
    }
    let mut w = vec![f64::INFINITY; domain.num_slots()];
    for e in domain.edges() {
        w[domain.slot(e).unwrap()] = field.weight_of(e)?;
    }
    Ok((domain, w))
}

/// Whether some `γ ∈ Ξ_n` has `τ(γ) < threshold`. Costs within a relative
/// `1e-9` of the threshold count as equal, so rounding in `a·n` cannot let
/// a path of cost exactly `a·n` through.
pub fn cheap_path_exists(field: &WeightField, n: usize, threshold: f64) -> Result<bool> {
    let (domain, w) = saw_weights(field, n)?;
    let floor = field.law().infimum().max(0.0);
    let strict = threshold - 1e-9 * threshold.abs().max(1.0);
    fn dfs(dom: &BoxDomain, w: &[f64], visited: &mut [bool], v: usize, left: usize, cost: f64, floor: f64, strict: f64) -> bool {
        if cost + left as f64 * floor >= strict {
            return false;
        }
        if left == 0 {
            return true;
        }
        let mut nbrs = [(0usize, 0usize); 6];
        let mut k = 0;
        dom.for_each_neighbor(v, |u, slot| {
            nbrs[k] = (u, slot);
            k += 1;
        });
        nbrs[..k].sort_by(|a, b| w[a.1].total_cmp(&w[b.1]));
        for &(u, slot) in &nbrs[..k] {
            if visited[u] {
                continue;
            }
            visited[u] = true;
            let found = dfs(dom, w, visited, u, left - 1, cost + w[slot], floor, strict);
            visited[u] = false;
            if found {
                return true;
            }
        }
        false
    }
    let mut visited = vec![false; domain.num_vertices()];
    let o = domain.vertex_index(Vertex::ORIGIN).unwrap();
    visited[o] = true;
    Ok(dfs(&domain, &w, &mut visited, o, n, 0.0, floor, strict))
}

/// `min_{γ ∈ Ξ_n} τ(γ)` by plain enumeration.
pub fn min_saw_passage_time(field: &WeightField, n: usize) -> Result<f64> {
    let (domain, w) = saw_weights(field, n)?;
    let saws = enumerate_saws(domain.dim(), n)?;
    Ok(saws
        .iter()
        .map(|p| crate::stats::sum(path_edges(&p).iter().map(|e| w[domain.slot(*e).unwrap()])))
        .fold(f64::INFINITY, f64::min))
}

/// Anchors `x_0 = 0, …, x_r` whose boxes `l·x_i + [−2l, 2l]^d` cover an animal.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AnimalCover {
    pub l: usize,
    /// Vertex count of the animal.
    pub n: usize,
    pub anchors: Vec<Vertex>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CoverCheck {
    pub count_ok: bool,
    pub containment_ok: bool,
    pub steps_ok: bool,
    pub origin_ok: bool,
}

impl CoverCheck {
    pub fn all(&self) -> bool {
        self.count_ok && self.containment_ok && self.steps_ok && self.origin_ok
    }
}

fn neighbours(v: Vertex, d: usize) -> impl Iterator<Item = Vertex> {
    (0..2 * d).map(move |k| {
        let (axis, sign) = direction(d, k);
        v.step(axis, sign)
    })
}

/// Cover of a connected animal containing the origin, with `n = #animal`
/// and `1 ≤ l ≤ n`. Anchors are `⌊w_{il} / l⌋` along the closed depth-first
/// walk `w` of a spanning tree (clamped to the walk's end).
pub fn animal_cover(animal: &[Vertex], d: usize, l: usize) -> Result<AnimalCover> {
    if d != 2 && d != 3 {
        return Err(Error::Dimension(d));
    }
    let set: HashSet<Vertex> = animal.iter().copied().collect();
    if !set.contains(&Vertex::ORIGIN) {
        return Err(Error::Precondition("animal must contain the origin".into()));
    }
    let n = set.len();
    if l < 1 || l > n {
        return Err(Error::OutOfRange(format!("need 1 <= l <= n = {n}, got l = {l}")));
    }
    // depth-first closed walk of a spanning tree
    let mut walk = vec![Vertex::ORIGIN];
    let mut seen: HashSet<Vertex> = HashSet::from([Vertex::ORIGIN]);
    let mut stack: Vec<(Vertex, usize)> = vec![(Vertex::ORIGIN, 0)];
    while let Some(top) = stack.last_mut() {
        let (v, k) = *top;
        if k == 2 * d {
            stack.pop();
            if let Some(&(parent, _)) = stack.last() {
                walk.push(parent);
            }
            continue;
        }
        top.1 += 1;
        let (axis, sign) = direction(d, k);
        let w = v.step(axis, sign);
        if set.contains(&w) && seen.insert(w) {
            walk.push(w);
            stack.push((w, 0));
        }
    }
    if seen.len() != n {
        return Err(Error::Precondition("animal is not connected".into()));
    }
    let r = 2 * n / l;
    let anchors = (0..=r)
        .map(|i| {
            let w = walk[(i * l).min(walk.len() - 1)];
            let mut c = [0; 3];
            for k in 0..d {
                c[k] = w.0[k].div_euclid(l as i32);
            }
            Vertex(c)
        })
        .collect();
    Ok(AnimalCover { l, n, anchors })
}

/// Check the cover's conclusions against the animal.
pub fn verify_cover(animal: &[Vertex], d: usize, cover: &AnimalCover) -> CoverCheck {
    let set: BTreeSet<Vertex> = animal.iter().copied().collect();
    let l = cover.l as i64;
    let count_ok = cover.anchors.len() == 2 * set.len() / cover.l + 1;
    let origin_ok = cover.anchors.first() == Some(&Vertex::ORIGIN);
    let steps_ok = cover.anchors.windows(2).all(|w| w[0].linf_dist(&w[1]) <= 1);
    let containment_ok = set.iter().all(|v| {
        cover.anchors.iter().any(|x| {
            (0..d).all(|k| (v.0[k] as i64 - l * x.0[k] as i64).abs() <= 2 * l)
        })
    });
    CoverCheck {
        count_ok,
        containment_ok,
        steps_ok,
        origin_ok,
    }
}

/// Connected animal of `size` vertices grown from the origin by random edge
/// additions.
pub fn random_animal(s: &mut KeyedStream, d: usize, size: usize) -> Vec<Vertex> {
    let mut cells = vec![Vertex::ORIGIN];
    let mut set: HashSet<Vertex> = HashSet::from([Vertex::ORIGIN]);
    while cells.len() < size {
        let v = cells[s.below(cells.len() as u64) as usize];
        let (axis, sign) = direction(d, s.below(2 * d as u64) as usize);
        let w = v.step(axis, sign);
        if set.insert(w) {
            cells.push(w);
        }
    }
    cells
}

/// Whether a vertex set is connected (breadth-first search).
pub fn is_connected(animal: &[Vertex], d: usize) -> bool {
    let set: HashSet<Vertex> = animal.iter().copied().collect();
    let Some(&start) = animal.first() else {
        return true;
    };
    let mut seen = HashSet::from([start]);
    let mut queue = VecDeque::from([start]);
    while let Some(v) = queue.pop_front() {
        for w in neighbours(v, d) {
            if set.contains(&w) && seen.insert(w) {
                queue.push_back(w);
            }
        }
    }
    seen.len() == set.len()
}

//! Passage times, geodesics, `Geo(x, y)` and the threshold `D_{z,e}`.
//!
//! Everything runs on a [`PassageGraph`], a flat per-slot weight array built
//! from a [`WeightField`]. For purely atomic laws whose atoms are rationals
//! with a small common denominator `L`, weights are stored as the integers
//! `L·t_e` and every comparison is exact. Otherwise distances are compared
//! with tolerance `1e-12·max(1, τ)`.

use std::cmp::Reverse;
use std::collections::{BTreeSet, BinaryHeap};

use serde::Serialize;

use crate::distributions::EdgeWeightLaw;
use crate::error::Result;
use crate::lattice::{BoxDomain, EdgeId, Vertex, WeightField};

/// Largest common denominator tried when looking for an exact scale.
pub const MAX_DENOMINATOR: u32 = 10_000;
/// Relative tolerance used for non-exact weights.
pub const REL_TOLERANCE: f64 = 1e-12;

const EXACT_LIMIT: f64 = 9_007_199_254_740_992.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum TiePolicy {
    /// Weights are integers after multiplying by `scale`.
    Exact { scale: f64 },
    /// Distances within `rel·max(1, τ)` are equal.
    Tolerance { rel: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeodesicReport {
    pub tau: f64,
    pub one_path: Vec<EdgeId>,
    pub candidate_edges: BTreeSet<EdgeId>,
    pub geo_intersection: BTreeSet<EdgeId>,
}

/// Distance and hop fields of one label-setting search (scaled units).
#[derive(Debug, Clone)]
pub struct DistanceField {
    pub dist: Vec<f64>,
    pub hops: Vec<u32>,
}

#[derive(Debug, Clone, Copy)]
struct SearchOpts<'a> {
    target: Option<usize>,
    skip_slot: Option<usize>,
    /// Keep only vertices with `d + bound_field[v] <= bound`.
    prune: Option<(&'a [f64], f64)>,
    limit: f64,
    /// On reaching the target keep settling everything tied with it.
    settle_ties: bool,
}

impl Default for SearchOpts<'_> {
    fn default() -> Self {
        Self {
            target: None,
            skip_slot: None,
            prune: None,
            limit: f64::INFINITY,
            settle_ties: false,
        }
    }
}

/// Smallest denominator `L ≤ MAX_DENOMINATOR` making every value integral.
fn common_scale(values: &[f64]) -> Option<f64> {
    'outer: for l in 1..=MAX_DENOMINATOR {
        let lf = l as f64;
        for &a in values {
            let s = a * lf;
            if !s.is_finite() || (s - s.round()).abs() > 1e-9 * s.abs().max(1.0) {
                continue 'outer;
            }
        }
        return Some(lf);
    }
    None
}

/// Scale for the exact tie policy, if the law admits one.
pub fn exact_scale(law: &EdgeWeightLaw) -> Option<f64> {
    if !law.is_purely_atomic() {
        return None;
    }
    let values: Vec<f64> = law.atoms();
    common_scale(&values)
}

pub struct PassageGraph {
    domain: BoxDomain,
    weights: Vec<f64>,
    policy: TiePolicy,
    sentinel: f64,
}

impl PassageGraph {
    pub fn new(field: &WeightField) -> Self {
        let domain = field.domain().clone();
        let raw = field.materialize();
        let policy = Self::choose_policy(field, &raw);
        let scale = match policy {
            TiePolicy::Exact { scale } => scale,
            TiePolicy::Tolerance { .. } => 1.0,
        };
        let weights = raw
            .iter()
            .map(|&w| {
                if w.is_nan() || w.is_infinite() {
                    f64::INFINITY
                } else if matches!(policy, TiePolicy::Exact { .. }) {
                    (w * scale).round()
                } else {
                    w
                }
            })
            .collect();
        Self {
            domain,
            weights,
            policy,
            sentinel: field.sentinel(),
        }
    }

    /// Graph over explicit per-slot weights (`NaN` or `+∞` for absent edges),
    /// compared with the tolerance policy.
    pub fn from_raw(domain: BoxDomain, raw: &[f64]) -> Self {
        let weights: Vec<f64> = raw.iter().map(|&w| if w.is_finite() { w } else { f64::INFINITY }).collect();
        let sentinel = crate::stats::sum(weights.iter().copied().filter(|w| w.is_finite())) + 1.0;
        Self {
            domain,
            weights,
            policy: TiePolicy::Tolerance { rel: REL_TOLERANCE },
            sentinel,
        }
    }

    fn choose_policy(field: &WeightField, raw: &[f64]) -> TiePolicy {
        let tolerance = TiePolicy::Tolerance { rel: REL_TOLERANCE };
        let Some(law_scale) = exact_scale(field.law()) else {
            return tolerance;
        };
        let mut values: Vec<f64> = field.law().atoms();
        values.extend(field.overrides().values().copied().filter(|w| w.is_finite()));
        let scale = if field.overrides().is_empty() {
            law_scale
        } else {
            match common_scale(&values) {
                Some(s) => s,
                None => return tolerance,
            }
        };
        let total: f64 = raw.iter().filter(|w| w.is_finite()).map(|w| w * scale).sum();
        if total >= EXACT_LIMIT / 4.0 {
            return tolerance;
        }
        TiePolicy::Exact { scale }
    }

    pub fn domain(&self) -> &BoxDomain {
        &self.domain
    }

    pub fn policy(&self) -> TiePolicy {
        self.policy
    }

    fn scale(&self) -> f64 {
        match self.policy {
            TiePolicy::Exact { scale } => scale,
            TiePolicy::Tolerance { .. } => 1.0,
        }
    }

    /// Convert a scaled distance to real units; unreachable maps to the sentinel.
    fn unscale(&self, d: f64) -> f64 {
        if d.is_infinite() {
            self.sentinel
        } else {
            d / self.scale()
        }
    }

    /// Slack allowed when comparing distances near `reference` (scaled units).
    fn tol(&self, reference: f64) -> f64 {
        match self.policy {
            TiePolicy::Exact { .. } => 0.0,
            TiePolicy::Tolerance { rel } => rel * reference.abs().max(1.0),
        }
    }

    /// Scaled weight of a slot (`+∞` for removed or invalid slots).
    pub fn scaled_weight(&self, slot: usize) -> f64 {
        self.weights[slot]
    }

    /// Real weight of an in-box edge.
    pub fn weight(&self, e: EdgeId) -> Result<f64> {
        let s = self.domain.require_slot(e)?;
        Ok(self.unscale(self.weights[s]))
    }

    fn search(&self, src: usize, opts: SearchOpts<'_>) -> DistanceField {
        let nv = self.domain.num_vertices();
        let mut dist = vec![f64::INFINITY; nv];
        let mut hops = vec![u32::MAX; nv];
        let mut heap = BinaryHeap::new();
        dist[src] = 0.0;
        hops[src] = 0;
        heap.push(Reverse((0f64.to_bits(), 0u32, src as u32)));
        let mut limit = opts.limit;
        while let Some(Reverse((bits, h, v))) = heap.pop() {
            let d = f64::from_bits(bits);
            let v = v as usize;
            if d != dist[v] || h != hops[v] {
                continue;
            }
            if d > limit {
                break;
            }
            if opts.target == Some(v) {
                if !opts.settle_ties {
                    break;
                }
                if limit.is_infinite() {
                    limit = d + self.tol(d);
                }
            }
            self.domain.for_each_neighbor(v, |w, slot| {
                if opts.skip_slot == Some(slot) {
                    return;
                }
                let nd = d + self.weights[slot];
                if nd.is_infinite() {
                    return;
                }
                if let Some((bf, bound)) = opts.prune {
                    if nd + bf[w] > bound {
                        return;
                    }
                }
                let nh = h + 1;
                if nd < dist[w] || (nd == dist[w] && nh < hops[w]) {
                    dist[w] = nd;
                    hops[w] = nh;
                    heap.push(Reverse((nd.to_bits(), nh, w as u32)));
                }
            });
        }
        DistanceField { dist, hops }
    }

    /// Full distance field from `src` in scaled units.
    pub fn distance_field(&self, src: Vertex) -> Result<DistanceField> {
        let s = self.domain.require_vertex(src)?;
        Ok(self.search(s, SearchOpts::default()))
    }

    pub fn passage_time(&self, x: Vertex, y: Vertex) -> Result<f64> {
        let xi = self.domain.require_vertex(x)?;
        let yi = self.domain.require_vertex(y)?;
        Ok(self.unscale(self.passage_scaled(xi, yi, None)))
    }

    /// Passage time in scaled units (`+∞` if unreachable).
    pub fn passage_time_scaled(&self, x: Vertex, y: Vertex) -> Result<f64> {
        let xi = self.domain.require_vertex(x)?;
        let yi = self.domain.require_vertex(y)?;
        Ok(self.passage_scaled(xi, yi, None))
    }

    /// Rooted at the smaller index so that `τ(x, y)` and `τ(y, x)` agree bitwise.
    fn passage_scaled(&self, xi: usize, yi: usize, skip_slot: Option<usize>) -> f64 {
        if xi == yi {
            return 0.0;
        }
        let (xi, yi) = (xi.min(yi), xi.max(yi));
        let f = self.search(
            xi,
            SearchOpts {
                target: Some(yi),
                skip_slot,
                ..SearchOpts::default()
            },
        );
        f.dist[yi]
    }

    /// Field from `y` settled at least up to `τ(x, y)` (plus tolerance).
    fn field_towards(&self, xi: usize, yi: usize) -> DistanceField {
        self.search(
            yi,
            SearchOpts {
                target: Some(xi),
                settle_ties: true,
                ..SearchOpts::default()
            },
        )
    }

    /// Walk from `x` to `y` along `fy`, taking the smallest canonical edge
    /// that keeps the step tight and strictly lowers the hop count.
    fn walk(&self, xi: usize, yi: usize, fy: &DistanceField) -> Vec<EdgeId> {
        let mut path = Vec::new();
        if fy.dist[xi].is_infinite() {
            return path;
        }
        let mut v = xi;
        while v != yi {
            let dv = fy.dist[v];
            let tol = self.tol(dv);
            let mut best: Option<(EdgeId, usize)> = None;
            self.domain.for_each_neighbor(v, |w, slot| {
                let t = self.weights[slot];
                if t.is_infinite() || fy.hops[w] >= fy.hops[v] {
                    return;
                }
                if (fy.dist[w] + t - dv).abs() > tol {
                    return;
                }
                let e = self.domain.edge_at_slot(slot).expect("neighbour slot holds an edge");
                if best.is_none_or(|(b, _)| e < b) {
                    best = Some((e, w));
                }
            });
            let (e, w) = best.expect("a tight predecessor exists on every settled vertex");
            path.push(e);
            v = w;
        }
        path
    }

    pub fn some_geodesic(&self, x: Vertex, y: Vertex) -> Result<Vec<EdgeId>> {
        let xi = self.domain.require_vertex(x)?;
        let yi = self.domain.require_vertex(y)?;
        if xi == yi {
            return Ok(Vec::new());
        }
        let fy = self.field_towards(xi, yi);
        Ok(self.walk(xi, yi, &fy))
    }

    /// `τ(x, y)` and the first geodesic from a single search.
    pub fn tau_and_geodesic(&self, x: Vertex, y: Vertex) -> Result<(f64, Vec<EdgeId>)> {
        let xi = self.domain.require_vertex(x)?;
        let yi = self.domain.require_vertex(y)?;
        if xi == yi {
            return Ok((0.0, Vec::new()));
        }
        let fy = self.field_towards(xi, yi);
        Ok((self.unscale(fy.dist[xi]), self.walk(xi, yi, &fy)))
    }

    /// `τ`, one geodesic, the candidate edges and `Geo(x, y)`.
    pub fn geodesic_report(&self, x: Vertex, y: Vertex) -> Result<GeodesicReport> {
        let xi = self.domain.require_vertex(x)?;
        let yi = self.domain.require_vertex(y)?;
        if xi == yi {
            return Ok(GeodesicReport {
                tau: 0.0,
                one_path: Vec::new(),
                candidate_edges: BTreeSet::new(),
                geo_intersection: BTreeSet::new(),
            });
        }
        let fy = self.field_towards(xi, yi);
        let tau = fy.dist[xi];
        if tau.is_infinite() {
            return Ok(GeodesicReport {
                tau: self.sentinel,
                one_path: Vec::new(),
                candidate_edges: BTreeSet::new(),
                geo_intersection: BTreeSet::new(),
            });
        }
        let tol = self.tol(tau);
        let bound = tau + tol;
        let fx = self.search(
            xi,
            SearchOpts {
                limit: bound,
                ..SearchOpts::default()
            },
        );
        let one_path = self.walk(xi, yi, &fy);

        let mut candidate_edges = BTreeSet::new();
        for v in 0..self.domain.num_vertices() {
            if fx.dist[v] > bound {
                continue;
            }
            self.domain.for_each_neighbor(v, |w, slot| {
                let t = self.weights[slot];
                if t.is_finite() && (fx.dist[v] + t + fy.dist[w] - tau).abs() <= tol {
                    candidate_edges.insert(self.domain.edge_at_slot(slot).unwrap());
                }
            });
        }

        let mut geo_intersection = BTreeSet::new();
        for &e in &one_path {
            let slot = self.domain.slot(e).unwrap();
            let alt = self.search(
                xi,
                SearchOpts {
                    target: Some(yi),
                    skip_slot: Some(slot),
                    prune: Some((&fy.dist, bound)),
                    limit: bound,
                    settle_ties: false,
                },
            );
            if alt.dist[yi] > bound {
                geo_intersection.insert(e);
            }
        }

        Ok(GeodesicReport {
            tau: self.unscale(tau),
            one_path,
            candidate_edges,
            geo_intersection,
        })
    }

    /// `D_{z,e} = B − A` for the displacement `x`, in real units.
    pub fn d_threshold(&self, z: Vertex, e: EdgeId, x: Vertex) -> Result<f64> {
        let slot = self.domain.require_slot(e)?;
        let zi = self.domain.require_vertex(z)?;
        let ti = self.domain.require_vertex(z + x)?;
        let opts = SearchOpts {
            skip_slot: Some(slot),
            ..SearchOpts::default()
        };
        let from_z = self.search(zi, opts);
        let b = from_z.dist[ti];
        if b.is_infinite() {
            return Ok(self.sentinel);
        }
        let to_t = self.search(ti, opts);
        let (u, v) = e.endpoints();
        let ui = self.domain.vertex_index(u).unwrap();
        let vi = self.domain.vertex_index(v).unwrap();
        let a = (from_z.dist[ui] + to_t.dist[vi]).min(from_z.dist[vi] + to_t.dist[ui]);
        if a.is_infinite() {
            return Ok(-self.sentinel);
        }
        Ok((b - a) / self.scale())
    }
}

pub fn passage_time(field: &WeightField, x: Vertex, y: Vertex) -> Result<f64> {
    PassageGraph::new(field).passage_time(x, y)
}

pub fn some_geodesic(field: &WeightField, x: Vertex, y: Vertex) -> Result<Vec<EdgeId>> {
    PassageGraph::new(field).some_geodesic(x, y)
}

pub fn geo_intersection(field: &WeightField, x: Vertex, y: Vertex) -> Result<GeodesicReport> {
    PassageGraph::new(field).geodesic_report(x, y)
}

pub fn d_threshold(field: &WeightField, z: Vertex, e: EdgeId, x: Vertex) -> Result<f64> {
    PassageGraph::new(field).d_threshold(z, e, x)
}

/// `#{e ∈ Geo(x, y) : t_e ∈ [lo, hi)}`.
pub fn count_geo_edges_in_range(field: &WeightField, x: Vertex, y: Vertex, lo: f64, hi: f64) -> Result<usize> {
    check_range(lo, hi)?;
    let g = PassageGraph::new(field);
    let report = g.geodesic_report(x, y)?;
    count_in_range(&g, report.geo_intersection.iter(), lo, hi)
}

/// `#{e ∈ first geodesic : t_e ∈ [lo, hi)}`.
pub fn first_geodesic_count_in_range(field: &WeightField, x: Vertex, y: Vertex, lo: f64, hi: f64) -> Result<usize> {
    check_range(lo, hi)?;
    let g = PassageGraph::new(field);
    let path = g.some_geodesic(x, y)?;
    count_in_range(&g, path.iter(), lo, hi)
}

fn check_range(lo: f64, hi: f64) -> Result<()> {
    if lo.is_nan() || hi.is_nan() || lo > hi {
        return Err(crate::Error::OutOfRange(format!("need lo <= hi, got [{lo}, {hi})")));
    }
    Ok(())
}

pub fn count_in_range<'a>(
    g: &PassageGraph,
    edges: impl Iterator<Item = &'a EdgeId>,
    lo: f64,
    hi: f64,
) -> Result<usize> {
    let mut n = 0;
    for &e in edges {
        let t = g.weight(e)?;
        if t >= lo && t < hi {
            n += 1;
        }
    }
    Ok(n)
}

/// `max_γ #(E ∩ γ)` over the supplied geodesics.
pub fn max_intersection_with(geodesics: &[Vec<EdgeId>], set: &BTreeSet<EdgeId>) -> usize {
    geodesics
        .iter()
        .map(|g| g.iter().filter(|e| set.contains(e)).count())
        .max()
        .unwrap_or(0)
}

/// Whether any vertex of the path lies on the boundary of the box.
pub fn path_touches_boundary(domain: &BoxDomain, path: &[EdgeId]) -> bool {
    path.iter().any(|e| {
        let (u, v) = e.endpoints();
        domain.on_boundary(u) || domain.on_boundary(v)
    })
}

#[cfg(test)]
pub(crate) mod oracle {
    //! Brute force over simple paths, for small boxes only.
    use super::*;

    pub struct BruteForce {
        pub best: f64,
        pub optimal: Vec<Vec<EdgeId>>,
    }

    /// All simple paths from `x` to `y`; weights taken from the field in
    /// real units, optimal set compared with `tol`.
    pub fn brute_force(field: &WeightField, x: Vertex, y: Vertex, tol: f64) -> BruteForce {
        let dom = field.domain();
        let mut all: Vec<(f64, Vec<EdgeId>)> = Vec::new();
        let mut visited = vec![false; dom.num_vertices()];
        let mut stack = Vec::new();
        let xi = dom.vertex_index(x).unwrap();
        let yi = dom.vertex_index(y).unwrap();
        fn rec(
            dom: &BoxDomain,
            field: &WeightField,
            v: usize,
            yi: usize,
            cost: f64,
            visited: &mut Vec<bool>,
            stack: &mut Vec<EdgeId>,
            all: &mut Vec<(f64, Vec<EdgeId>)>,
        ) {
            if v == yi {
                all.push((cost, stack.clone()));
                return;
            }
            visited[v] = true;
            let mut nbrs = Vec::new();
            dom.for_each_neighbor(v, |w, slot| nbrs.push((w, slot)));
            for (w, slot) in nbrs {
                let e = dom.edge_at_slot(slot).unwrap();
                if visited[w] || field.is_removed(e) {
                    continue;
                }
                stack.push(e);
                rec(dom, field, w, yi, cost + field.weight_of(e).unwrap(), visited, stack, all);
                stack.pop();
            }
            visited[v] = false;
        }
        rec(dom, field, xi, yi, 0.0, &mut visited, &mut stack, &mut all);
        let best = all.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
        let optimal = all
            .into_iter()
            .filter(|p| p.0 <= best + tol)
            .map(|p| p.1)
            .collect();
        BruteForce { best, optimal }
    }

    pub fn in_every(optimal: &[Vec<EdgeId>]) -> BTreeSet<EdgeId> {
        let mut it = optimal.iter();
        let mut acc: BTreeSet<EdgeId> = it.next().map(|p| p.iter().copied().collect()).unwrap_or_default();
        for p in it {
            let s: BTreeSet<EdgeId> = p.iter().copied().collect();
            acc = acc.intersection(&s).copied().collect();
        }
        acc
    }

    pub fn in_some(optimal: &[Vec<EdgeId>]) -> BTreeSet<EdgeId> {
        optimal.iter().flatten().copied().collect()
    }
}

//! Finite boxes of Z^d (d = 2, 3), canonical edge ids and seed-addressed
//! weight fields.
//!
//! Vertices are indexed row-major with coordinate 0 most significant, so the
//! vertex index order is the lexicographic order on coordinates. An edge
//! `{v, v + e_k}` has canonical form `(v, k)` and occupies slot `index(v)·d + k`;
//! slot order is therefore the canonical `(v, k)` order.

use std::collections::BTreeMap;
use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Serialize};

use crate::distributions::EdgeWeightLaw;
use crate::error::{Error, Result};
use crate::rng::{hash_words, unit_open};

/// A lattice point. Coordinates beyond the dimension are zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize, Default)]
pub struct Vertex(pub [i32; 3]);

impl Vertex {
    pub const ORIGIN: Vertex = Vertex([0, 0, 0]);

    pub fn new2(x: i32, y: i32) -> Self {
        Vertex([x, y, 0])
    }

    pub fn new3(x: i32, y: i32, z: i32) -> Self {
        Vertex([x, y, z])
    }

    pub fn from_slice(c: &[i32]) -> Self {
        let mut v = [0; 3];
        v[..c.len()].copy_from_slice(c);
        Vertex(v)
    }

    /// `n · e_axis`.
    pub fn axis_point(axis: usize, n: i32) -> Self {
        let mut v = [0; 3];
        v[axis] = n;
        Vertex(v)
    }

    pub fn step(self, axis: usize, delta: i32) -> Self {
        let mut c = self.0;
        c[axis] += delta;
        Vertex(c)
    }

    pub fn l1_norm(&self) -> i64 {
        self.0.iter().map(|c| (*c as i64).abs()).sum()
    }

    pub fn linf_dist(&self, other: &Vertex) -> i64 {
        (0..3).map(|k| (self.0[k] as i64 - other.0[k] as i64).abs()).max().unwrap()
    }
}

impl std::ops::Add for Vertex {
    type Output = Vertex;
    fn add(self, o: Vertex) -> Vertex {
        Vertex([self.0[0] + o.0[0], self.0[1] + o.0[1], self.0[2] + o.0[2]])
    }
}

impl std::ops::Sub for Vertex {
    type Output = Vertex;
    fn sub(self, o: Vertex) -> Vertex {
        Vertex([self.0[0] - o.0[0], self.0[1] - o.0[1], self.0[2] - o.0[2]])
    }
}

/// Canonical edge `{vertex, vertex + e_axis}`; ordered lexicographically by
/// `(vertex, axis)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct EdgeId {
    pub vertex: Vertex,
    pub axis: u8,
}

impl EdgeId {
    pub fn new(vertex: Vertex, axis: usize) -> Self {
        Self {
            vertex,
            axis: axis as u8,
        }
    }

    /// Canonical id of the edge between two neighbours.
    pub fn between(u: Vertex, v: Vertex) -> Option<EdgeId> {
        let diff = v - u;
        if diff.l1_norm() != 1 {
            return None;
        }
        let axis = (0..3).find(|&k| diff.0[k] != 0).unwrap();
        if diff.0[axis] == 1 {
            Some(EdgeId::new(u, axis))
        } else {
            Some(EdgeId::new(v, axis))
        }
    }

    pub fn far_end(&self) -> Vertex {
        self.vertex.step(self.axis as usize, 1)
    }

    pub fn endpoints(&self) -> (Vertex, Vertex) {
        (self.vertex, self.far_end())
    }

    pub fn translate(&self, by: Vertex) -> EdgeId {
        EdgeId {
            vertex: self.vertex + by,
            axis: self.axis,
        }
    }
}

/// The box `[lo, hi] ⊂ Z^d` with all nearest-neighbour edges inside it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoxDomain {
    d: usize,
    lo: [i32; 3],
    hi: [i32; 3],
    extent: [usize; 3],
    stride: [usize; 3],
}

impl BoxDomain {
    pub fn new(d: usize, lo: &[i32], hi: &[i32]) -> Result<Self> {
        if d != 2 && d != 3 {
            return Err(Error::Dimension(d));
        }
        if lo.len() != d || hi.len() != d {
            return Err(Error::OutOfRange(format!("box corners must have {d} coordinates")));
        }
        let mut l = [0; 3];
        let mut h = [0; 3];
        let mut extent = [1usize; 3];
        for k in 0..d {
            if lo[k] > hi[k] {
                return Err(Error::OutOfRange(format!("box needs lo <= hi, axis {k}: {} > {}", lo[k], hi[k])));
            }
            l[k] = lo[k];
            h[k] = hi[k];
            extent[k] = (hi[k] as i64 - lo[k] as i64 + 1) as usize;
        }
        let stride = [extent[1] * extent[2], extent[2], 1];
        Ok(Self {
            d,
            lo: l,
            hi: h,
            extent,
            stride,
        })
    }

    /// `[lo, hi]^d`.
    pub fn cube(d: usize, lo: i32, hi: i32) -> Result<Self> {
        Self::new(d, &vec![lo; d], &vec![hi; d])
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn lo(&self) -> Vertex {
        Vertex(self.lo)
    }

    pub fn hi(&self) -> Vertex {
        Vertex(self.hi)
    }

    pub fn num_vertices(&self) -> usize {
        self.extent.iter().product()
    }

    pub fn num_slots(&self) -> usize {
        self.num_vertices() * self.d
    }

    pub fn num_edges(&self) -> usize {
        (0..self.d)
            .map(|k| (self.extent[k] - 1) * self.num_vertices() / self.extent[k])
            .sum()
    }

    pub fn contains(&self, v: Vertex) -> bool {
        (0..3).all(|k| if k < self.d { v.0[k] >= self.lo[k] && v.0[k] <= self.hi[k] } else { v.0[k] == 0 })
    }

    pub fn contains_edge(&self, e: EdgeId) -> bool {
        (e.axis as usize) < self.d && self.contains(e.vertex) && self.contains(e.far_end())
    }

    pub fn on_boundary(&self, v: Vertex) -> bool {
        (0..self.d).any(|k| v.0[k] == self.lo[k] || v.0[k] == self.hi[k])
    }

    pub fn vertex_index(&self, v: Vertex) -> Option<usize> {
        if !self.contains(v) {
            return None;
        }
        Some(
            (0..self.d)
                .map(|k| (v.0[k] - self.lo[k]) as usize * self.stride[k])
                .sum(),
        )
    }

    pub fn vertex_at(&self, idx: usize) -> Vertex {
        let mut c = [0; 3];
        let mut rest = idx;
        for k in 0..self.d {
            c[k] = self.lo[k] + (rest / self.stride[k]) as i32;
            rest %= self.stride[k];
        }
        Vertex(c)
    }

    pub fn require_vertex(&self, v: Vertex) -> Result<usize> {
        self.vertex_index(v)
            .ok_or_else(|| Error::OutsideDomain(format!("vertex {:?}", &v.0[..self.d])))
    }

    pub fn slot(&self, e: EdgeId) -> Option<usize> {
        if !self.contains_edge(e) {
            return None;
        }
        Some(self.vertex_index(e.vertex)? * self.d + e.axis as usize)
    }

    pub fn require_slot(&self, e: EdgeId) -> Result<usize> {
        self.slot(e)
            .ok_or_else(|| Error::OutsideDomain(format!("edge {:?} axis {}", &e.vertex.0[..self.d], e.axis)))
    }

    /// Edge occupying a slot, if that slot holds an in-box edge.
    pub fn edge_at_slot(&self, slot: usize) -> Option<EdgeId> {
        let v = self.vertex_at(slot / self.d);
        let e = EdgeId::new(v, slot % self.d);
        self.contains_edge(e).then_some(e)
    }

    /// All edges in canonical order.
    pub fn edges(&self) -> impl Iterator<Item = EdgeId> + '_ {
        (0..self.num_slots()).filter_map(move |s| self.edge_at_slot(s))
    }

    /// Neighbours of a vertex index as `(neighbour index, edge slot)`.
    #[inline]
    pub fn for_each_neighbor(&self, idx: usize, mut f: impl FnMut(usize, usize)) {
        let mut rest = idx;
        for k in 0..self.d {
            let c = rest / self.stride[k];
            rest %= self.stride[k];
            if c + 1 < self.extent[k] {
                f(idx + self.stride[k], idx * self.d + k);
            }
            if c > 0 {
                let nb = idx - self.stride[k];
                f(nb, nb * self.d + k);
            }
        }
    }
}

/// The i.i.d. environment restricted to a box: weights addressed by
/// `(master_seed, canonical edge)` plus explicit per-edge overrides.
#[derive(Debug, Clone)]
pub struct WeightField {
    domain: BoxDomain,
    law: Arc<EdgeWeightLaw>,
    master_seed: u64,
    overrides: Arc<BTreeMap<EdgeId, f64>>,
    sentinel: OnceLock<f64>,
}

impl WeightField {
    pub fn new(domain: BoxDomain, law: EdgeWeightLaw, master_seed: u64) -> Self {
        Self::with_shared_law(domain, Arc::new(law), master_seed)
    }

    pub fn with_shared_law(domain: BoxDomain, law: Arc<EdgeWeightLaw>, master_seed: u64) -> Self {
        Self {
            domain,
            law,
            master_seed,
            overrides: Arc::new(BTreeMap::new()),
            sentinel: OnceLock::new(),
        }
    }

    pub fn domain(&self) -> &BoxDomain {
        &self.domain
    }

    pub fn law(&self) -> &EdgeWeightLaw {
        &self.law
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn overrides(&self) -> &BTreeMap<EdgeId, f64> {
        &self.overrides
    }

    /// The unit uniform attached to an edge. Keyed on absolute coordinates,
    /// so nested boxes with the same seed agree on shared edges.
    pub fn edge_uniform(&self, e: EdgeId) -> f64 {
        let c = e.vertex.0;
        unit_open(hash_words(
            self.master_seed,
            &[c[0] as i64 as u64, c[1] as i64 as u64, c[2] as i64 as u64, e.axis as u64],
        ))
    }

    /// Sampled weight before overrides, for an in-box edge.
    pub fn base_weight(&self, e: EdgeId) -> f64 {
        self.law
            .sample(self.edge_uniform(e))
            .expect("unit_open produces values in (0, 1)")
    }

    /// Weight after overrides; `+∞` marks a removed edge. No domain check.
    pub fn raw_weight(&self, e: EdgeId) -> f64 {
        match self.overrides.get(&e) {
            Some(&w) => w,
            None => self.base_weight(e),
        }
    }

    /// `t_e`, with removed edges reported as the finite sentinel.
    pub fn weight_of(&self, e: EdgeId) -> Result<f64> {
        self.domain.require_slot(e)?;
        let w = self.raw_weight(e);
        Ok(if w.is_infinite() { self.sentinel() } else { w })
    }

    pub fn is_removed(&self, e: EdgeId) -> bool {
        self.overrides.get(&e).is_some_and(|w| w.is_infinite())
    }

    /// A new field with `t_e = value`; `f64::INFINITY` removes the edge.
    pub fn with_override(&self, e: EdgeId, value: f64) -> Result<WeightField> {
        self.domain.require_slot(e)?;
        if value.is_nan() || value < 0.0 {
            return Err(Error::OutOfRange(format!("override must be nonnegative, got {value}")));
        }
        let mut map = (*self.overrides).clone();
        map.insert(e, value);
        Ok(WeightField {
            domain: self.domain.clone(),
            law: Arc::clone(&self.law),
            master_seed: self.master_seed,
            overrides: Arc::new(map),
            sentinel: OnceLock::new(),
        })
    }

    /// `with_override(e, +∞)`.
    pub fn without_edge(&self, e: EdgeId) -> Result<WeightField> {
        self.with_override(e, f64::INFINITY)
    }

    /// Weights per slot (`NaN` for slots that hold no in-box edge, `+∞` for
    /// removed edges).
    pub fn materialize(&self) -> Vec<f64> {
        (0..self.domain.num_slots())
            .map(|s| match self.domain.edge_at_slot(s) {
                Some(e) => self.raw_weight(e),
                None => f64::NAN,
            })
            .collect()
    }

    /// A finite value exceeding every path weight in the box: the sum of all
    /// finite edge weights plus one.
    pub fn sentinel(&self) -> f64 {
        *self.sentinel.get_or_init(|| {
            let s = crate::stats::sum(self.domain.edges().map(|e| self.raw_weight(e)).filter(|w| w.is_finite()));
            s + 1.0
        })
    }
}

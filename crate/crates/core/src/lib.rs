//! First-passage percolation on Z^d: edge-weight laws, dyadic Bernoulli
//! encodings, passage times and geodesics, finite entropy checks, greedy
//! lattice animals and the experiment drivers built on them.

// `!(x > 0.0)` style comparisons deliberately reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod animals;
pub mod distributions;
pub mod encoding;
pub mod entropy;
pub mod error;
pub mod experiments;
pub mod lattice;
pub mod rng;
pub mod shortest_path;
pub mod stats;

pub use distributions::{EdgeWeightLaw, Family};
pub use error::{Error, Result};
pub use lattice::{BoxDomain, EdgeId, Vertex, WeightField};

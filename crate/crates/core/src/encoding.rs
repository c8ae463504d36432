//! Dyadic quantile encoding of a law by fair bits.
//!
//! A bit string `ω₁…ω_J` addresses the dyadic index
//! `i(ω, J) = Σ 2^{J-l} ω_l` and is mapped to the level-`J` partition point
//! `a_{i,J}`, where `a_{0,J} = I` and `a_{i,J} = min{x : F(x) >= i/2^J}`.
//! Levels deeper than [`MATERIALIZE_MAX_LEVEL`] are never stored; single
//! points are computed on demand with one quantile evaluation.

use crate::distributions::EdgeWeightLaw;
use crate::error::{Error, Result};
use crate::rng::{hash_words, KeyedStream};

/// Deepest supported encoding level.
pub const MAX_DEPTH: u32 = 30;
/// Deepest level whose full partition is materialized.
pub const MATERIALIZE_MAX_LEVEL: u32 = 20;
pub const DEFAULT_DEPTH: u32 = 30;

/// A finite prefix `ω₁…ω_J` of a fair-bit sequence, `1 <= J <= 30`.
///
/// Stored as the dyadic index `i(ω, J)`: bit `ω₁` is the most significant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BitString {
    index: u32,
    depth: u32,
}

impl BitString {
    pub fn from_index(index: u32, depth: u32) -> Result<Self> {
        check_depth(depth)?;
        if depth < 32 && index >= (1u32 << depth) {
            return Err(Error::OutOfRange(format!("index {index} does not fit in {depth} bits")));
        }
        Ok(Self { index, depth })
    }

    pub fn from_bits(bits: &[bool]) -> Result<Self> {
        let depth = bits.len() as u32;
        check_depth(depth)?;
        let index = bits.iter().fold(0u32, |acc, &b| (acc << 1) | b as u32);
        Ok(Self { index, depth })
    }

    pub fn zeros(depth: u32) -> Result<Self> {
        Self::from_index(0, depth)
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    /// The dyadic index `i(ω, J)`.
    pub fn index(&self) -> u32 {
        self.index
    }

    /// Bit `ω_j`, 1-based.
    pub fn bit(&self, j: u32) -> bool {
        (self.index >> (self.depth - j)) & 1 == 1
    }

    /// Copy with bit `ω_j` (1-based) forced to `value`.
    pub fn with_bit(&self, j: u32, value: bool) -> Result<Self> {
        if j == 0 || j > self.depth {
            return Err(Error::OutOfRange(format!("bit position {j} outside 1..={}", self.depth)));
        }
        let mask = 1u32 << (self.depth - j);
        let index = if value { self.index | mask } else { self.index & !mask };
        Ok(Self { index, depth: self.depth })
    }

    /// The prefix `ω₁…ω_j`.
    pub fn prefix(&self, j: u32) -> Result<Self> {
        if j == 0 || j > self.depth {
            return Err(Error::OutOfRange(format!("prefix length {j} outside 1..={}", self.depth)));
        }
        Ok(Self {
            index: self.index >> (self.depth - j),
            depth: j,
        })
    }

    /// Coordinatewise order `ω <= ω̂`.
    pub fn le_coordinatewise(&self, other: &BitString) -> bool {
        self.depth == other.depth && self.index & !other.index == 0
    }
}

impl std::str::FromStr for BitString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bits = s
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::OutOfRange(format!("invalid bit character {other:?}"))),
            })
            .collect::<Result<Vec<bool>>>()?;
        Self::from_bits(&bits)
    }
}

impl std::fmt::Display for BitString {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for j in 1..=self.depth {
            f.write_str(if self.bit(j) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

fn check_depth(depth: u32) -> Result<()> {
    if depth == 0 || depth > MAX_DEPTH {
        return Err(Error::OutOfRange(format!("depth must lie in 1..={MAX_DEPTH}, got {depth}")));
    }
    Ok(())
}

/// `a_{i,j}` for a single index.
pub fn partition_value(law: &EdgeWeightLaw, i: u64, j: u32) -> Result<f64> {
    check_depth(j)?;
    let cells = 1u64 << j;
    if i >= cells {
        return Err(Error::OutOfRange(format!("index {i} outside level {j}")));
    }
    if i == 0 {
        return Ok(law.infimum());
    }
    law.quantile(i as f64 / cells as f64)
}

/// The level-`j` dyadic partition `a_{0,j} <= … <= a_{2^j-1,j}`.
#[derive(Debug, Clone)]
pub struct DyadicPartition {
    level: u32,
    law: EdgeWeightLaw,
    values: Option<Vec<f64>>,
}

impl DyadicPartition {
    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn len(&self) -> u64 {
        1u64 << self.level
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// The stored values, present only for levels up to
    /// [`MATERIALIZE_MAX_LEVEL`].
    pub fn values(&self) -> Option<&[f64]> {
        self.values.as_deref()
    }

    pub fn value(&self, i: u64) -> Result<f64> {
        match &self.values {
            Some(v) => v
                .get(i as usize)
                .copied()
                .ok_or_else(|| Error::OutOfRange(format!("index {i} outside level {}", self.level))),
            None => partition_value(&self.law, i, self.level),
        }
    }
}

pub fn partition_level(law: &EdgeWeightLaw, j: u32) -> Result<DyadicPartition> {
    check_depth(j)?;
    let values = if j <= MATERIALIZE_MAX_LEVEL {
        let cells = 1u64 << j;
        Some((0..cells).map(|i| partition_value(law, i, j)).collect::<Result<Vec<f64>>>()?)
    } else {
        None
    };
    Ok(DyadicPartition {
        level: j,
        law: law.clone(),
        values,
    })
}

/// `T_J(ω) = a_{i(ω,J),J}`.
pub fn encode_eval(law: &EdgeWeightLaw, bits: BitString) -> Result<f64> {
    partition_value(law, bits.index as u64, bits.depth)
}

/// Values of the encoder with bit `j` forced to 1 and to 0, in that order.
pub fn bit_flip_pair(law: &EdgeWeightLaw, bits: BitString, j: u32) -> Result<(f64, f64)> {
    let hi = encode_eval(law, bits.with_bit(j, true)?)?;
    let lo = encode_eval(law, bits.with_bit(j, false)?)?;
    Ok((hi, lo))
}

/// Width `a_{i+1,J} - a_{i,J}` of the partition cell that bounds the limit
/// value of every extension of `bits`; `None` for the top cell.
pub fn truncation_gap(law: &EdgeWeightLaw, bits: BitString) -> Result<Option<f64>> {
    let i = bits.index as u64;
    if i + 1 >= 1u64 << bits.depth {
        return Ok(None);
    }
    Ok(Some(
        partition_value(law, i + 1, bits.depth)? - partition_value(law, i, bits.depth)?,
    ))
}

/// Kolmogorov–Smirnov distance `sup_x |F_n(x) - F(x)|` between the
/// empirical distribution of `samples` and the law, exact for laws with
/// atoms (left limits are checked at every sample point).
pub fn ks_statistic(law: &EdgeWeightLaw, mut samples: Vec<f64>) -> f64 {
    let n = samples.len();
    if n == 0 {
        return f64::NAN;
    }
    samples.sort_by(f64::total_cmp);
    let nf = n as f64;
    let mut d: f64 = 0.0;
    let mut s = 0usize;
    while s < n {
        let v = samples[s];
        let mut e = s;
        while e < n && samples[e] == v {
            e += 1;
        }
        let right = (e as f64 / nf - law.cdf(v)).abs();
        let left = (s as f64 / nf - law.cdf_left(v)).abs();
        d = d.max(right).max(left);
        s = e;
    }
    d
}

/// Draw `n` uniform `depth`-bit strings, encode them, and return the KS
/// distance of the encoded sample to `F`.
pub fn verify_pushforward(law: &EdgeWeightLaw, depth: u32, n: usize, seed: u64) -> Result<f64> {
    check_depth(depth)?;
    if n < 1000 {
        return Err(Error::OutOfRange(format!("sample size must be at least 1000, got {n}")));
    }
    let mut stream = KeyedStream::new(hash_words(seed, &[0x7075_7368, depth as u64]));
    let samples = (0..n)
        .map(|_| {
            let index = (stream.next_u64() >> (64 - depth)) as u32;
            encode_eval(law, BitString { index, depth })
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(ks_statistic(law, samples))
}

/// Acceptance band for [`verify_pushforward`]: the 99% KS band plus the
/// `2^{-J+1}` truncation slack.
pub fn pushforward_band(n: usize, depth: u32) -> f64 {
    1.63 / (n as f64).sqrt() + 2f64.powi(-(depth as i32) + 1)
}

/// Exhaustive structural checks on all strings of one depth.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExhaustiveReport {
    pub depth: u32,
    /// Pairs `ω <= ω̂` with `T(ω) > T(ω̂)`.
    pub monotonicity_violations: u64,
    /// `(ω, j)` with `i(ω,j) < 2^j - 1` and `T_J(ω)` outside
    /// `[a_{i,j}, a_{i+1,j}]`.
    pub nesting_violations: u64,
    /// `(ω, j)` with `T_j(ω) > T_{j+1}(ω)`.
    pub level_violations: u64,
    /// Strings containing a 0 bit that encode to an infinite value.
    pub finiteness_violations: u64,
    /// `sup_x |π∘T_J^{-1}((-∞,x]) - F(x)|`.
    pub pushforward_sup_distance: f64,
}

impl ExhaustiveReport {
    pub fn passes(&self) -> bool {
        self.monotonicity_violations == 0
            && self.nesting_violations == 0
            && self.level_violations == 0
            && self.finiteness_violations == 0
            && self.pushforward_sup_distance <= 2f64.powi(-(self.depth as i32))
    }
}

/// Run every exhaustive encoder check at depth `J <= 12`.
pub fn exhaustive_check(law: &EdgeWeightLaw, depth: u32) -> Result<ExhaustiveReport> {
    if depth == 0 || depth > 12 {
        return Err(Error::Budget(format!("exhaustive checks need 1 <= depth <= 12, got {depth}")));
    }
    let levels: Vec<DyadicPartition> = (1..=depth).map(|j| partition_level(law, j)).collect::<Result<_>>()?;
    let top = levels[depth as usize - 1].values().unwrap();
    let cells = 1u32 << depth;

    // Monotonicity over all comparable pairs: enumerate supersets of each
    // mask as submask complements.
    let mut monotonicity_violations = 0u64;
    for w in 0..cells {
        let free = (cells - 1) & !w;
        let mut sub = free;
        loop {
            let hat = w | sub;
            if top[w as usize] > top[hat as usize] {
                monotonicity_violations += 1;
            }
            if sub == 0 {
                break;
            }
            sub = (sub - 1) & free;
        }
    }

    let mut nesting_violations = 0u64;
    let mut level_violations = 0u64;
    let mut finiteness_violations = 0u64;
    for w in 0..cells {
        let t = top[w as usize];
        if w != cells - 1 && !t.is_finite() {
            finiteness_violations += 1;
        }
        for j in 1..depth {
            let vals = levels[j as usize - 1].values().unwrap();
            let i = (w >> (depth - j)) as usize;
            if i + 1 < vals.len() && !(vals[i] <= t && t <= vals[i + 1]) {
                nesting_violations += 1;
            }
            let next = levels[j as usize].values().unwrap();
            let i_next = (w >> (depth - j - 1)) as usize;
            if vals[i] > next[i_next] {
                level_violations += 1;
            }
        }
    }

    Ok(ExhaustiveReport {
        depth,
        monotonicity_violations,
        nesting_violations,
        level_violations,
        finiteness_violations,
        pushforward_sup_distance: pushforward_sup_distance(law, top),
    })
}

/// Sup distance between the uniform measure on the partition points and
/// `F`, checked at each point and at its left limit.
fn pushforward_sup_distance(law: &EdgeWeightLaw, points: &[f64]) -> f64 {
    let total = points.len() as f64;
    let mut d: f64 = 0.0;
    let mut s = 0usize;
    while s < points.len() {
        let v = points[s];
        let mut e = s;
        while e < points.len() && points[e] == v {
            e += 1;
        }
        if v.is_finite() {
            d = d
                .max((e as f64 / total - law.cdf(v)).abs())
                .max((s as f64 / total - law.cdf_left(v)).abs());
        }
        s = e;
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tp() -> EdgeWeightLaw {
        EdgeWeightLaw::two_point(1.0, 2.0, 0.5).unwrap()
    }

    fn u01() -> EdgeWeightLaw {
        EdgeWeightLaw::uniform(0.0, 1.0).unwrap()
    }

    fn bs(s: &str) -> BitString {
        s.parse().unwrap()
    }

    /// Independent oracle: scan atoms for the first with cumulative mass
    /// reaching the level.
    fn atom_scan(values: &[f64], probs: &[f64], u: f64) -> f64 {
        let mut acc = 0.0;
        for (v, p) in values.iter().zip(probs) {
            acc += p;
            if acc >= u {
                return *v;
            }
        }
        *values.last().unwrap()
    }

    #[test]
    fn partition_examples() {
        assert_eq!(partition_level(&u01(), 2).unwrap().values().unwrap(), &[0.0, 0.25, 0.5, 0.75]);
        assert_eq!(partition_level(&tp(), 2).unwrap().values().unwrap(), &[1.0, 1.0, 1.0, 2.0]);
        let e = partition_level(&EdgeWeightLaw::exponential(1.0).unwrap(), 1).unwrap();
        let v = e.values().unwrap();
        assert_eq!(v[0], 0.0);
        assert!((v[1] - 2f64.ln()).abs() < 1e-15);
        assert!(partition_level(&u01(), 0).is_err());
        assert!(partition_level(&u01(), 31).is_err());
        let deep = partition_level(&u01(), 25).unwrap();
        assert!(deep.values().is_none());
        assert_eq!(deep.value(1 << 24).unwrap(), 0.5);
    }

    #[test]
    fn encode_examples() {
        assert_eq!(encode_eval(&u01(), bs("101")).unwrap(), 0.625);
        assert_eq!(encode_eval(&tp(), bs("1011")).unwrap(), 2.0);
        assert_eq!(encode_eval(&tp(), bs("1000")).unwrap(), 1.0);
        for law in [u01(), tp(), EdgeWeightLaw::pareto(2.0, 3.0).unwrap()] {
            assert_eq!(encode_eval(&law, BitString::zeros(17).unwrap()).unwrap(), law.infimum());
        }
    }

    #[test]
    fn encode_matches_atom_scan_on_all_depth4_strings() {
        let (values, probs) = ([1.0, 2.0], [0.5, 0.5]);
        for i in 0..16u32 {
            let b = BitString::from_index(i, 4).unwrap();
            let expect = if i == 0 { 1.0 } else { atom_scan(&values, &probs, i as f64 / 16.0) };
            assert_eq!(encode_eval(&tp(), b).unwrap(), expect, "bits {b}");
        }
    }

    #[test]
    fn bit_flip_examples() {
        assert_eq!(bit_flip_pair(&u01(), bs("0110"), 1).unwrap(), (0.875, 0.375));
        assert_eq!(bit_flip_pair(&tp(), bs("1000"), 2).unwrap(), (2.0, 1.0));
        let law = EdgeWeightLaw::exponential(2.0).unwrap();
        let z = BitString::zeros(9).unwrap();
        let a1 = partition_level(&law, 9).unwrap().value(1).unwrap();
        assert_eq!(bit_flip_pair(&law, z, 9).unwrap(), (a1, law.infimum()));
        assert!(bit_flip_pair(&law, z, 10).is_err());
        assert!(bit_flip_pair(&law, z, 0).is_err());
    }

    #[test]
    fn finiteness_for_unbounded_laws() {
        for law in [EdgeWeightLaw::exponential(1.0).unwrap(), EdgeWeightLaw::pareto(1.0, 2.5).unwrap()] {
            let ones = BitString::from_index((1 << 30) - 1, 30).unwrap();
            assert!(encode_eval(&law, ones).unwrap().is_finite());
            let one_zero = ones.with_bit(30, false).unwrap();
            assert!(encode_eval(&law, one_zero).unwrap().is_finite());
        }
    }

    #[test]
    fn constant_law_pushforward_is_exact() {
        let c = EdgeWeightLaw::constant(3.0).unwrap();
        assert_eq!(verify_pushforward(&c, 7, 1000, 1).unwrap(), 0.0);
        assert_eq!(verify_pushforward(&c, 30, 5000, 2).unwrap(), 0.0);
        assert!(verify_pushforward(&c, 30, 999, 2).is_err());
    }

    #[test]
    fn bitstring_round_trip() {
        let b = bs("0110");
        assert_eq!(b.to_string(), "0110");
        assert!(b.bit(2) && !b.bit(1));
        assert_eq!(b.prefix(2).unwrap().to_string(), "01");
        assert!(bs("0100").le_coordinatewise(&b));
        assert!(!bs("1000").le_coordinatewise(&b));
        assert!("012".parse::<BitString>().is_err());
        assert!("".parse::<BitString>().is_err());
    }

    #[test]
    fn exhaustive_small_depth() {
        for law in [u01(), tp(), EdgeWeightLaw::exponential(1.0).unwrap()] {
            let r = exhaustive_check(&law, 8).unwrap();
            assert!(r.passes(), "{r:?}");
        }
        assert!(exhaustive_check(&u01(), 13).is_err());
    }
}

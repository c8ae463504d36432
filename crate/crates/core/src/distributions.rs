//! Edge-weight laws on `[0, ∞)` with exact CDF and quantile access.
//!
//! A law is described by a [`Family`] record (the serialized form used in
//! experiment configs) and validated into an [`EdgeWeightLaw`], which caches
//! a normalized internal representation, the infimum `I` and the supremum
//! `S` of the support.
//!
//! Quantiles are computed as the smallest `f64` whose computed CDF reaches
//! the level, so `cdf(quantile(u)) >= u` holds exactly in floating point and
//! the quantile is monotone in `u`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Bond-percolation threshold on Z^2 (exact).
pub const PC_2D: f64 = 0.5;
/// Bond-percolation threshold on Z^3 (numerical estimate).
pub const PC_3D: f64 = 0.2488;

const SUM_TOL: f64 = 1e-12;

pub fn percolation_threshold(d: usize) -> Result<f64> {
    match d {
        2 => Ok(PC_2D),
        3 => Ok(PC_3D),
        other => Err(Error::Dimension(other)),
    }
}

/// Serialized description of a law, tagged by `family`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Family {
    /// Mass `p` at `a`, mass `1 - p` at `b`.
    TwoPoint { a: f64, b: f64, p: f64 },
    Uniform { lo: f64, hi: f64 },
    Exponential { rate: f64 },
    Pareto { xmin: f64, alpha: f64 },
    FiniteAtomic { values: Vec<f64>, probs: Vec<f64> },
    Mixture { components: Vec<Family>, weights: Vec<f64> },
    DiracPlusUniform { atom: f64, atom_mass: f64, lo: f64, hi: f64 },
}

#[derive(Debug, Clone, PartialEq)]
enum Repr {
    /// Sorted distinct atoms with positive mass; `cum` ends at exactly 1.
    Atoms {
        values: Vec<f64>,
        probs: Vec<f64>,
        cum: Vec<f64>,
    },
    Uniform {
        lo: f64,
        hi: f64,
    },
    Exponential {
        rate: f64,
    },
    Pareto {
        xmin: f64,
        alpha: f64,
    },
    /// Positive weights summing to exactly 1.
    Mixture {
        parts: Vec<(f64, Repr)>,
    },
}

/// A validated edge-weight law. Immutable and cheap to share.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Family", into = "Family")]
pub struct EdgeWeightLaw {
    family: Family,
    repr: Repr,
    inf: f64,
    sup: f64,
}

/// Outcome of [`check_assumptions`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AssumptionReport {
    pub has_2log_moment: bool,
    pub atom_at_zero_mass: f64,
    pub pc_threshold: f64,
    pub satisfies_geodesic_condition: bool,
}

impl TryFrom<Family> for EdgeWeightLaw {
    type Error = Error;

    fn try_from(family: Family) -> Result<Self> {
        EdgeWeightLaw::new(family)
    }
}

impl From<EdgeWeightLaw> for Family {
    fn from(law: EdgeWeightLaw) -> Family {
        law.family
    }
}

fn bad(msg: impl Into<String>) -> Error {
    Error::InvalidLaw(msg.into())
}

fn check_nonneg(name: &str, x: f64) -> Result<()> {
    if !x.is_finite() || x < 0.0 {
        return Err(bad(format!("{name} must be finite and nonnegative, got {x}")));
    }
    Ok(())
}

fn check_weights(name: &str, w: &[f64]) -> Result<()> {
    if w.is_empty() {
        return Err(bad(format!("{name} must be nonempty")));
    }
    for &p in w {
        if !p.is_finite() || p < 0.0 {
            return Err(bad(format!("{name} entries must be nonnegative, got {p}")));
        }
    }
    let total: f64 = crate::stats::sum(w.iter().copied());
    if (total - 1.0).abs() > SUM_TOL {
        return Err(bad(format!("{name} must sum to 1, got {total}")));
    }
    Ok(())
}

fn atoms_repr(values: &[f64], probs: &[f64]) -> Result<Repr> {
    if values.len() != probs.len() {
        return Err(bad("values and probs must have equal length"));
    }
    for &v in values {
        check_nonneg("atom value", v)?;
    }
    check_weights("probs", probs)?;
    let mut pairs: Vec<(f64, f64)> = values
        .iter()
        .copied()
        .zip(probs.iter().copied())
        .filter(|&(_, p)| p > 0.0)
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut vals: Vec<f64> = Vec::new();
    let mut ps: Vec<f64> = Vec::new();
    for (v, p) in pairs {
        if vals.last() == Some(&v) {
            *ps.last_mut().unwrap() += p;
        } else {
            vals.push(v);
            ps.push(p);
        }
    }
    let total: f64 = crate::stats::sum(ps.iter().copied());
    for p in ps.iter_mut() {
        *p /= total;
    }
    let mut cum = Vec::with_capacity(ps.len());
    let mut acc = crate::stats::CompensatedSum::new();
    for &p in &ps {
        acc.add(p);
        cum.push(acc.value().min(1.0));
    }
    *cum.last_mut().unwrap() = 1.0;
    Ok(Repr::Atoms {
        values: vals,
        probs: ps,
        cum,
    })
}

fn uniform_repr(lo: f64, hi: f64) -> Result<Repr> {
    check_nonneg("lo", lo)?;
    if !hi.is_finite() || lo >= hi {
        return Err(bad(format!("uniform requires lo < hi, got lo={lo}, hi={hi}")));
    }
    Ok(Repr::Uniform { lo, hi })
}

fn mixture_repr(parts: Vec<(f64, Repr)>) -> Result<Repr> {
    let weights: Vec<f64> = parts.iter().map(|p| p.0).collect();
    check_weights("weights", &weights)?;
    let total: f64 = crate::stats::sum(weights.iter().copied());
    let parts: Vec<(f64, Repr)> = parts
        .into_iter()
        .filter(|(w, _)| *w > 0.0)
        .map(|(w, r)| (w / total, r))
        .collect();
    if parts.len() == 1 {
        return Ok(parts.into_iter().next().unwrap().1);
    }
    Ok(Repr::Mixture { parts })
}

fn build(family: &Family) -> Result<Repr> {
    match family {
        Family::TwoPoint { a, b, p } => {
            check_nonneg("a", *a)?;
            check_nonneg("b", *b)?;
            if a >= b {
                return Err(bad(format!("two_point requires a < b, got a={a}, b={b}")));
            }
            if !(0.0..=1.0).contains(p) {
                return Err(bad(format!("two_point requires p in [0, 1], got {p}")));
            }
            atoms_repr(&[*a, *b], &[*p, 1.0 - *p])
        }
        Family::Uniform { lo, hi } => uniform_repr(*lo, *hi),
        Family::Exponential { rate } => {
            if !rate.is_finite() || *rate <= 0.0 {
                return Err(bad(format!("exponential requires rate > 0, got {rate}")));
            }
            Ok(Repr::Exponential { rate: *rate })
        }
        Family::Pareto { xmin, alpha } => {
            if !xmin.is_finite() || *xmin <= 0.0 {
                return Err(bad(format!("pareto requires xmin > 0, got {xmin}")));
            }
            if !alpha.is_finite() || *alpha <= 1.0 {
                return Err(bad(format!("pareto requires alpha > 1, got {alpha}")));
            }
            Ok(Repr::Pareto {
                xmin: *xmin,
                alpha: *alpha,
            })
        }
        Family::FiniteAtomic { values, probs } => atoms_repr(values, probs),
        Family::Mixture {
            components,
            weights,
        } => {
            if components.len() != weights.len() {
                return Err(bad("components and weights must have equal length"));
            }
            let parts = components
                .iter()
                .zip(weights)
                .map(|(c, &w)| build(c).map(|r| (w, r)))
                .collect::<Result<Vec<_>>>()?;
            mixture_repr(parts)
        }
        Family::DiracPlusUniform {
            atom,
            atom_mass,
            lo,
            hi,
        } => {
            check_nonneg("atom", *atom)?;
            if !(0.0..=1.0).contains(atom_mass) {
                return Err(bad(format!("atom_mass must lie in [0, 1], got {atom_mass}")));
            }
            let parts = vec![
                (*atom_mass, atoms_repr(&[*atom], &[1.0])?),
                (1.0 - *atom_mass, uniform_repr(*lo, *hi)?),
            ];
            mixture_repr(parts)
        }
    }
}

impl Repr {
    fn inf(&self) -> f64 {
        match self {
            Repr::Atoms { values, .. } => values[0],
            Repr::Uniform { lo, .. } => *lo,
            Repr::Exponential { .. } => 0.0,
            Repr::Pareto { xmin, .. } => *xmin,
            Repr::Mixture { parts } => parts.iter().map(|p| p.1.inf()).fold(f64::INFINITY, f64::min),
        }
    }

    fn sup(&self) -> f64 {
        match self {
            Repr::Atoms { values, .. } => *values.last().unwrap(),
            Repr::Uniform { hi, .. } => *hi,
            Repr::Exponential { .. } | Repr::Pareto { .. } => f64::INFINITY,
            Repr::Mixture { parts } => parts.iter().map(|p| p.1.sup()).fold(0.0, f64::max),
        }
    }

    fn cdf(&self, x: f64) -> f64 {
        match self {
            Repr::Atoms { values, cum, .. } => {
                let k = values.partition_point(|&v| v <= x);
                if k == 0 {
                    0.0
                } else {
                    cum[k - 1]
                }
            }
            Repr::Uniform { lo, hi } => {
                if x <= *lo {
                    0.0
                } else if x >= *hi {
                    1.0
                } else {
                    (x - lo) / (hi - lo)
                }
            }
            Repr::Exponential { rate } => {
                if x <= 0.0 {
                    0.0
                } else {
                    -(-rate * x).exp_m1()
                }
            }
            Repr::Pareto { xmin, alpha } => {
                if x < *xmin {
                    0.0
                } else {
                    1.0 - (xmin / x).powf(*alpha)
                }
            }
            Repr::Mixture { parts } => {
                if x >= self.sup() {
                    return 1.0;
                }
                let s: f64 = crate::stats::sum(parts.iter().map(|(w, r)| w * r.cdf(x)));
                s.clamp(0.0, 1.0)
            }
        }
    }

    fn atom_mass(&self, x: f64) -> f64 {
        match self {
            Repr::Atoms { values, probs, .. } => match values.binary_search_by(|v| v.total_cmp(&x)) {
                Ok(i) => probs[i],
                Err(_) => 0.0,
            },
            Repr::Mixture { parts } => parts.iter().map(|(w, r)| w * r.atom_mass(x)).sum(),
            _ => 0.0,
        }
    }

    fn cdf_left(&self, x: f64) -> f64 {
        match self {
            Repr::Atoms { values, cum, .. } => {
                let k = values.partition_point(|&v| v < x);
                if k == 0 {
                    0.0
                } else {
                    cum[k - 1]
                }
            }
            Repr::Mixture { .. } => (self.cdf(x) - self.atom_mass(x)).max(0.0),
            _ => self.cdf(x),
        }
    }

    fn atoms(&self, out: &mut Vec<f64>) {
        match self {
            Repr::Atoms { values, .. } => out.extend_from_slice(values),
            Repr::Mixture { parts } => parts.iter().for_each(|p| p.1.atoms(out)),
            _ => {}
        }
    }

    fn is_purely_atomic(&self) -> bool {
        match self {
            Repr::Atoms { .. } => true,
            Repr::Mixture { parts } => parts.iter().all(|p| p.1.is_purely_atomic()),
            _ => false,
        }
    }

    fn has_2log_moment(&self) -> bool {
        match self {
            Repr::Atoms { .. } | Repr::Uniform { .. } | Repr::Exponential { .. } => true,
            // ∫ x^2 log x · x^{-alpha-1} dx converges iff alpha > 2
            Repr::Pareto { alpha, .. } => *alpha > 2.0,
            Repr::Mixture { parts } => parts.iter().all(|p| p.1.has_2log_moment()),
        }
    }

    /// Closed-form starting point for the quantile search; `None` where no
    /// closed form exists.
    fn quantile_guess(&self, u: f64) -> Option<f64> {
        match self {
            Repr::Uniform { lo, hi } => Some(lo + u * (hi - lo)),
            Repr::Exponential { rate } => Some(-(-u).ln_1p() / rate),
            Repr::Pareto { xmin, alpha } => Some(xmin * (1.0 - u).powf(-1.0 / alpha)),
            _ => None,
        }
    }

    fn quantile(&self, u: f64) -> f64 {
        if let Repr::Atoms { values, cum, .. } = self {
            let k = cum.partition_point(|&c| c < u);
            return values[k.min(values.len() - 1)];
        }
        let inf = self.inf();
        if u >= 1.0 {
            return self.sup();
        }
        if self.cdf(inf) >= u {
            return inf;
        }
        let (lo, hi) = match self {
            Repr::Mixture { parts } => {
                let qs: Vec<f64> = parts.iter().map(|p| p.1.quantile(u)).collect();
                let lo = qs.iter().copied().fold(f64::INFINITY, f64::min);
                let hi = qs.iter().copied().fold(0.0, f64::max);
                (lo, hi)
            }
            _ => {
                let guess = self.quantile_guess(u).unwrap().max(inf);
                if let Some(x) = self.snap_locally(guess, u) {
                    return x;
                }
                let mut hi = guess.max(inf);
                let mut step = hi.abs().max(1e-300) * 1e-12;
                while self.cdf(hi) < u {
                    hi += step;
                    step *= 2.0;
                }
                (inf, hi)
            }
        };
        min_float_reaching(|x| self.cdf(x), lo, hi, u)
    }

    /// Walk a few ulps from `guess` to the smallest float with cdf >= u.
    fn snap_locally(&self, guess: f64, u: f64) -> Option<f64> {
        let mut x = guess;
        let mut steps = 0;
        while self.cdf(x) < u {
            x = x.next_up();
            steps += 1;
            if steps > 16 {
                return None;
            }
        }
        let inf = self.inf();
        while x > inf && self.cdf(x.next_down()) >= u {
            x = x.next_down();
            steps += 1;
            if steps > 32 {
                return None;
            }
        }
        Some(x)
    }
}

/// Smallest nonnegative float `x` in `[lo, hi]` with `f(x) >= u`, for
/// non-decreasing `f` with `f(hi) >= u`. Bisects on the bit pattern, which
/// is order-preserving for nonnegative floats.
fn min_float_reaching(f: impl Fn(f64) -> f64, lo: f64, hi: f64, u: f64) -> f64 {
    if f(lo) >= u {
        return lo;
    }
    let mut lo_bits = lo.max(0.0).to_bits();
    let mut hi_bits = hi.to_bits();
    while hi_bits - lo_bits > 1 {
        let mid = lo_bits + (hi_bits - lo_bits) / 2;
        if f(f64::from_bits(mid)) >= u {
            hi_bits = mid;
        } else {
            lo_bits = mid;
        }
    }
    f64::from_bits(hi_bits)
}

impl EdgeWeightLaw {
    pub fn new(family: Family) -> Result<Self> {
        let repr = build(&family)?;
        let inf = repr.inf();
        let sup = repr.sup();
        Ok(Self {
            family,
            repr,
            inf,
            sup,
        })
    }

    pub fn two_point(a: f64, b: f64, p: f64) -> Result<Self> {
        Self::new(Family::TwoPoint { a, b, p })
    }

    pub fn uniform(lo: f64, hi: f64) -> Result<Self> {
        Self::new(Family::Uniform { lo, hi })
    }

    pub fn exponential(rate: f64) -> Result<Self> {
        Self::new(Family::Exponential { rate })
    }

    pub fn pareto(xmin: f64, alpha: f64) -> Result<Self> {
        Self::new(Family::Pareto { xmin, alpha })
    }

    pub fn finite_atomic(values: Vec<f64>, probs: Vec<f64>) -> Result<Self> {
        Self::new(Family::FiniteAtomic { values, probs })
    }

    /// Point mass at `c`.
    pub fn constant(c: f64) -> Result<Self> {
        Self::finite_atomic(vec![c], vec![1.0])
    }

    /// {0,1}-valued law with `P(1) = p`.
    pub fn bernoulli(p: f64) -> Result<Self> {
        Self::finite_atomic(vec![0.0, 1.0], vec![1.0 - p, p])
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    /// `I = inf{x : F(x) > 0}`.
    pub fn infimum(&self) -> f64 {
        self.inf
    }

    /// `S = sup{x : F(x) < 1}`, possibly infinite.
    pub fn supremum(&self) -> f64 {
        self.sup
    }

    /// `F(x) = μ((-∞, x])`.
    pub fn cdf(&self, x: f64) -> f64 {
        self.repr.cdf(x)
    }

    /// `F(x-) = μ((-∞, x))`.
    pub fn cdf_left(&self, x: f64) -> f64 {
        self.repr.cdf_left(x)
    }

    /// `μ({x})`.
    pub fn atom_mass(&self, x: f64) -> f64 {
        self.repr.atom_mass(x)
    }

    /// `min{x : F(x) >= u}` for `u ∈ (0, 1]`. Infinite at `u = 1` for laws
    /// with unbounded support.
    pub fn quantile(&self, u: f64) -> Result<f64> {
        if !(u > 0.0 && u <= 1.0) {
            return Err(Error::OutOfRange(format!("quantile level must lie in (0, 1], got {u}")));
        }
        Ok(self.repr.quantile(u))
    }

    /// Inverse-CDF sample from a unit uniform in `(0, 1)`.
    pub fn sample(&self, unit_uniform: f64) -> Result<f64> {
        if !(unit_uniform > 0.0 && unit_uniform < 1.0) {
            return Err(Error::OutOfRange(format!(
                "unit uniform must lie in (0, 1), got {unit_uniform}"
            )));
        }
        Ok(self.repr.quantile(unit_uniform))
    }

    /// Sorted atom locations (empty for atomless laws).
    pub fn atoms(&self) -> Vec<f64> {
        let mut out = Vec::new();
        self.repr.atoms(&mut out);
        out.sort_by(f64::total_cmp);
        out.dedup();
        out
    }

    pub fn is_purely_atomic(&self) -> bool {
        self.repr.is_purely_atomic()
    }

    pub fn is_atomless(&self) -> bool {
        self.atoms().is_empty()
    }
}

/// Evaluate the moment and atom-at-zero conditions for dimension `d`.
pub fn check_assumptions(law: &EdgeWeightLaw, d: usize) -> Result<AssumptionReport> {
    let pc = percolation_threshold(d)?;
    let mass0 = law.atom_mass(0.0);
    Ok(AssumptionReport {
        has_2log_moment: law.repr.has_2log_moment(),
        atom_at_zero_mass: mass0,
        pc_threshold: pc,
        satisfies_geodesic_condition: mass0 < pc,
    })
}

/// One representative law per supported family.
pub fn reference_laws() -> Vec<(&'static str, EdgeWeightLaw)> {
    let law = |f: Family| EdgeWeightLaw::new(f).expect("reference laws are valid");
    vec![
        ("two_point", law(Family::TwoPoint { a: 1.0, b: 2.0, p: 0.5 })),
        ("uniform", law(Family::Uniform { lo: 1.0, hi: 2.0 })),
        ("exponential", law(Family::Exponential { rate: 1.5 })),
        ("pareto", law(Family::Pareto { xmin: 1.0, alpha: 3.0 })),
        (
            "finite_atomic",
            law(Family::FiniteAtomic {
                values: vec![0.0, 0.5, 3.0],
                probs: vec![0.2, 0.3, 0.5],
            }),
        ),
        (
            "mixture",
            law(Family::Mixture {
                components: vec![
                    Family::Uniform { lo: 0.0, hi: 1.0 },
                    Family::FiniteAtomic {
                        values: vec![2.0],
                        probs: vec![1.0],
                    },
                ],
                weights: vec![0.5, 0.5],
            }),
        ),
        (
            "dirac_plus_uniform",
            law(Family::DiracPlusUniform {
                atom: 0.0,
                atom_mass: 0.3,
                lo: 0.5,
                hi: 1.5,
            }),
        ),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn mix_u01_atom2() -> EdgeWeightLaw {
        EdgeWeightLaw::new(Family::Mixture {
            components: vec![
                Family::Uniform { lo: 0.0, hi: 1.0 },
                Family::FiniteAtomic {
                    values: vec![2.0],
                    probs: vec![1.0],
                },
            ],
            weights: vec![0.5, 0.5],
        })
        .unwrap()
    }

    #[test]
    fn cdf_examples() {
        assert_eq!(EdgeWeightLaw::two_point(1.0, 2.0, 0.5).unwrap().cdf(1.0), 0.5);
        assert_eq!(EdgeWeightLaw::uniform(0.0, 1.0).unwrap().cdf(0.25), 0.25);
        assert_eq!(mix_u01_atom2().cdf(2.0), 1.0);
        // direct summation of component CDFs just below the atom
        assert!((mix_u01_atom2().cdf(1.5) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn quantile_examples() {
        let tp = EdgeWeightLaw::two_point(1.0, 2.0, 0.5).unwrap();
        assert_eq!(EdgeWeightLaw::uniform(0.0, 1.0).unwrap().quantile(0.5).unwrap(), 0.5);
        assert_eq!(tp.quantile(0.5).unwrap(), 1.0);
        assert_eq!(tp.quantile(0.75).unwrap(), 2.0);
        assert!(tp.quantile(0.0).is_err());
        assert!(tp.quantile(1.5).is_err());
        assert_eq!(tp.quantile(1.0).unwrap(), 2.0);
    }

    #[test]
    fn sample_examples() {
        assert_eq!(EdgeWeightLaw::uniform(0.0, 1.0).unwrap().sample(0.3).unwrap(), 0.3);
        assert_eq!(EdgeWeightLaw::two_point(1.0, 2.0, 0.5).unwrap().sample(0.9).unwrap(), 2.0);
        let e = EdgeWeightLaw::exponential(1.0).unwrap();
        let u = 1.0 - (-1.0f64).exp();
        assert!((e.sample(u).unwrap() - 1.0).abs() < 1e-12);
        assert!(e.sample(1.0).is_err());
        assert!(e.sample(0.0).is_err());
    }

    #[test]
    fn assumption_examples() {
        let r = check_assumptions(&EdgeWeightLaw::pareto(1.0, 3.0).unwrap(), 2).unwrap();
        assert!(r.has_2log_moment);
        let r = check_assumptions(&EdgeWeightLaw::pareto(1.0, 2.0).unwrap(), 2).unwrap();
        assert!(!r.has_2log_moment);
        let r = check_assumptions(
            &EdgeWeightLaw::finite_atomic(vec![0.0, 1.0], vec![0.6, 0.4]).unwrap(),
            2,
        )
        .unwrap();
        assert!(!r.satisfies_geodesic_condition);
        assert_eq!(r.atom_at_zero_mass, 0.6);
        let r = check_assumptions(&EdgeWeightLaw::uniform(0.0, 1.0).unwrap(), 2).unwrap();
        assert_eq!(r.atom_at_zero_mass, 0.0);
        assert!(r.satisfies_geodesic_condition);
        let r = check_assumptions(
            &EdgeWeightLaw::finite_atomic(vec![0.0, 1.0], vec![0.3, 0.7]).unwrap(),
            3,
        )
        .unwrap();
        assert!(!r.satisfies_geodesic_condition);
        assert!(check_assumptions(&EdgeWeightLaw::uniform(0.0, 1.0).unwrap(), 1).is_err());
        assert!(check_assumptions(&EdgeWeightLaw::uniform(0.0, 1.0).unwrap(), 4).is_err());
    }

    #[test]
    fn construction_is_validated() {
        assert!(EdgeWeightLaw::two_point(2.0, 1.0, 0.5).is_err());
        assert!(EdgeWeightLaw::uniform(1.0, 1.0).is_err());
        assert!(EdgeWeightLaw::uniform(-1.0, 1.0).is_err());
        assert!(EdgeWeightLaw::pareto(0.0, 3.0).is_err());
        assert!(EdgeWeightLaw::pareto(1.0, 1.0).is_err());
        assert!(EdgeWeightLaw::exponential(0.0).is_err());
        assert!(EdgeWeightLaw::finite_atomic(vec![1.0, 2.0], vec![0.5, 0.4]).is_err());
        assert!(EdgeWeightLaw::finite_atomic(vec![1.0, 2.0], vec![0.5, 0.5 + 1e-13]).is_ok());
        assert!(EdgeWeightLaw::finite_atomic(vec![-1.0], vec![1.0]).is_err());
    }

    #[test]
    fn infimum_and_supremum() {
        let l = EdgeWeightLaw::new(Family::DiracPlusUniform {
            atom: 0.5,
            atom_mass: 0.25,
            lo: 1.0,
            hi: 3.0,
        })
        .unwrap();
        assert_eq!(l.infimum(), 0.5);
        assert_eq!(l.supremum(), 3.0);
        assert_eq!(l.atom_mass(0.5), 0.25);
        assert_eq!(l.cdf_left(0.5), 0.0);
        assert_eq!(l.quantile(0.25).unwrap(), 0.5);
        assert!(l.quantile(0.2500001).unwrap() > 1.0);
        assert_eq!(EdgeWeightLaw::pareto(2.0, 3.0).unwrap().supremum(), f64::INFINITY);
        assert_eq!(EdgeWeightLaw::exponential(2.0).unwrap().quantile(1.0).unwrap(), f64::INFINITY);
    }

    #[test]
    fn json_round_trip_uses_tagged_records() {
        let law: EdgeWeightLaw =
            serde_json::from_str(r#"{"family":"two_point","a":1.0,"b":2.0,"p":0.5}"#).unwrap();
        assert_eq!(law.cdf(1.0), 0.5);
        let back = serde_json::to_value(&law).unwrap();
        assert_eq!(back["family"], "two_point");
        let err = serde_json::from_str::<EdgeWeightLaw>(r#"{"family":"uniform","lo":2.0,"hi":1.0}"#);
        assert!(err.is_err());
    }

    pub(crate) fn catalog() -> Vec<EdgeWeightLaw> {
        reference_laws().into_iter().map(|(_, law)| law).collect()
    }

    proptest! {
        #[test]
        fn quantile_is_monotone(u in 1e-9f64..1.0, v in 1e-9f64..1.0, k in 0usize..7) {
            let law = &catalog()[k];
            let (u, v) = if u <= v { (u, v) } else { (v, u) };
            prop_assert!(law.quantile(u).unwrap() <= law.quantile(v).unwrap());
        }

        #[test]
        fn quantile_inverts_cdf(x in 0.0f64..6.0, k in 0usize..7) {
            let law = &catalog()[k];
            let fx = law.cdf(x);
            prop_assert!((0.0..=1.0).contains(&fx));
            if fx > 0.0 {
                let q = law.quantile(fx).unwrap();
                prop_assert!(law.cdf(q) >= fx);
                prop_assert!(q <= x);
            }
        }

        #[test]
        fn quantile_is_the_minimum(u in 1e-9f64..1.0, k in 0usize..7) {
            let law = &catalog()[k];
            let q = law.quantile(u).unwrap();
            prop_assert!(law.cdf(q) >= u);
            if q > law.infimum() {
                prop_assert!(law.cdf(q.next_down()) < u);
            }
        }
    }

    #[test]
    fn inverse_cdf_sampling_passes_ks_band() {
        let n = 100_000usize;
        for (k, law) in catalog().iter().enumerate() {
            let mut s = crate::rng::KeyedStream::new(k as u64);
            let xs: Vec<f64> = (0..n).map(|_| law.sample(s.uniform()).unwrap()).collect();
            let ks = crate::encoding::ks_statistic(law, xs);
            assert!(ks <= 1.63 / (n as f64).sqrt(), "family {k}: KS {ks}");
        }
    }
}

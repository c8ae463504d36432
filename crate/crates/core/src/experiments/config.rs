use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::distributions::EdgeWeightLaw;
use crate::error::{Error, Result};

pub const DEFAULT_PAD_EXPONENT: f64 = 0.75;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    VarianceScaling,
    FmCompare,
    GeoLength,
    LowDensity,
    CheapPath,
    Animals,
    Encoding,
    EntropySuite,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 8] = [
        ExperimentKind::VarianceScaling,
        ExperimentKind::FmCompare,
        ExperimentKind::GeoLength,
        ExperimentKind::LowDensity,
        ExperimentKind::CheapPath,
        ExperimentKind::Animals,
        ExperimentKind::Encoding,
        ExperimentKind::EntropySuite,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::VarianceScaling => "variance_scaling",
            ExperimentKind::FmCompare => "fm_compare",
            ExperimentKind::GeoLength => "geo_length",
            ExperimentKind::LowDensity => "low_density",
            ExperimentKind::CheapPath => "cheap_path",
            ExperimentKind::Animals => "animals",
            ExperimentKind::Encoding => "encoding",
            ExperimentKind::EntropySuite => "entropy_suite",
        }
    }

    /// Experiments that solve for geodesics and so need the geodesic condition.
    pub fn uses_geodesics(self) -> bool {
        matches!(
            self,
            ExperimentKind::VarianceScaling
                | ExperimentKind::FmCompare
                | ExperimentKind::GeoLength
                | ExperimentKind::LowDensity
        )
    }
}

impl std::fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheapPathMode {
    /// Exact minimum over self-avoiding paths when within budget.
    Auto,
    Exact,
    /// Lower bound from the first `n` edges of a geodesic to `n·e₁`.
    Geodesic,
}

/// One experiment run. Field names are the JSON keys.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub d: usize,
    pub law: EdgeWeightLaw,
    pub n_values: Vec<usize>,
    pub replications: usize,
    pub master_seed: u64,
    #[serde(default = "default_pad_exponent")]
    pub pad_exponent: f64,
    pub out_path: String,

    /// low_density: interval widths above the infimum.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilons: Option<Vec<f64>>,
    /// low_density: exponent of the bound (default 2).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    /// cheap_path: threshold slope.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cheap_path_mode: Option<CheapPathMode>,
    /// animals: Bernoulli densities.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_values: Option<Vec<f64>>,
    /// encoding: bit depth and sample count.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub depth: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    /// entropy_suite: number of FPP mini-environments.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub environments: Option<usize>,
}

fn default_pad_exponent() -> f64 {
    DEFAULT_PAD_EXPONENT
}

pub const DEFAULT_EPSILONS: [f64; 4] = [0.01, 0.05, 0.1, 0.2];
pub const DEFAULT_P_VALUES: [f64; 5] = [1.0, 0.5, 0.25, 0.125, 0.0625];
pub const DEFAULT_A: f64 = 1.1;
pub const DEFAULT_ALPHA: f64 = 2.0;
pub const DEFAULT_SAMPLES: usize = 100_000;
pub const DEFAULT_ENVIRONMENTS: usize = 100;

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_value(value: serde_json::Value) -> Result<Self> {
        let cfg: Self = serde_json::from_value(value).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.d == 1 {
            return Err(Error::Config(
                "d = 1 is not supported: passage times on Z are sums of i.i.d. weights".into(),
            ));
        }
        if self.d != 2 && self.d != 3 {
            return Err(Error::Dimension(self.d));
        }
        let needs_n = !matches!(self.experiment, ExperimentKind::EntropySuite | ExperimentKind::Encoding);
        if needs_n && self.n_values.is_empty() {
            return Err(Error::Config("n_values must not be empty".into()));
        }
        if self.n_values.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config("n_values must be strictly ascending".into()));
        }
        if needs_n && self.n_values.contains(&0) {
            return Err(Error::Config("n_values must be positive".into()));
        }
        if self.replications < 2 {
            return Err(Error::Config("replications must be at least 2".into()));
        }
        if !(self.pad_exponent >= 0.0 && self.pad_exponent.is_finite()) {
            return Err(Error::Config(format!("pad_exponent must be a nonnegative number, got {}", self.pad_exponent)));
        }
        if let Some(eps) = &self.epsilons {
            if eps.is_empty() || eps.iter().any(|e| !(*e > 0.0)) {
                return Err(Error::Config("epsilons must be a nonempty list of positive numbers".into()));
            }
        }
        if let Some(alpha) = self.alpha {
            if !(alpha > 1.0) {
                return Err(Error::Config(format!("alpha must exceed 1, got {alpha}")));
            }
        }
        if let Some(a) = self.a {
            if !a.is_finite() {
                return Err(Error::Config("a must be finite".into()));
            }
        }
        if let Some(ps) = &self.p_values {
            if ps.is_empty() || ps.iter().any(|p| !(*p > 0.0 && *p <= 1.0)) {
                return Err(Error::Config("p_values must lie in (0, 1]".into()));
            }
        }
        if let Some(depth) = self.depth {
            if depth == 0 || depth > crate::encoding::MAX_DEPTH {
                return Err(Error::Config(format!("depth must lie in 1..={}", crate::encoding::MAX_DEPTH)));
            }
        }
        if self.out_path.is_empty() {
            return Err(Error::Config("out_path must not be empty".into()));
        }
        Ok(())
    }

    pub fn epsilons(&self) -> Vec<f64> {
        self.epsilons.clone().unwrap_or_else(|| DEFAULT_EPSILONS.to_vec())
    }

    pub fn alpha(&self) -> f64 {
        self.alpha.unwrap_or(DEFAULT_ALPHA)
    }

    pub fn a(&self) -> f64 {
        self.a.unwrap_or(DEFAULT_A)
    }

    pub fn p_values(&self) -> Vec<f64> {
        self.p_values.clone().unwrap_or_else(|| DEFAULT_P_VALUES.to_vec())
    }

    pub fn depth(&self) -> u32 {
        self.depth.unwrap_or(crate::encoding::DEFAULT_DEPTH)
    }

    pub fn samples(&self) -> usize {
        self.samples.unwrap_or(DEFAULT_SAMPLES)
    }

    pub fn environments(&self) -> usize {
        self.environments.unwrap_or(DEFAULT_ENVIRONMENTS)
    }

    pub fn cheap_path_mode(&self) -> CheapPathMode {
        self.cheap_path_mode.unwrap_or(CheapPathMode::Auto)
    }
}

/// Human-readable description of the JSON schema, for `--help`.
pub const SCHEMA: &str = r#"Config file (JSON, snake_case keys):
  experiment     one of variance_scaling, fm_compare, geo_length, low_density,
                 cheap_path, animals, encoding, entropy_suite
                 (the subcommand overrides this field)
  d              lattice dimension, 2 or 3
  law            edge-weight law, tagged by "family":
                   {"family":"two_point","a":1,"b":2,"p":0.5}   (p = mass at a)
                   {"family":"uniform","lo":0,"hi":1}
                   {"family":"exponential","rate":1}
                   {"family":"pareto","xmin":1,"alpha":3}
                   {"family":"finite_atomic","values":[..],"probs":[..]}
                   {"family":"mixture","components":[law,..],"weights":[..]}
                   {"family":"dirac_plus_uniform","atom":0,"atom_mass":0.3,"lo":0.5,"hi":1.5}
  n_values       ascending displacements (x = n e1) or path lengths
  replications   replications per n (>= 2)
  master_seed    64-bit seed
  pad_exponent   box padding exponent (default 0.75)
  out_path       CSV output path; the manifest goes to <out_path>.manifest.json
Optional:
  epsilons       low_density widths (default [0.01,0.05,0.1,0.2])
  alpha          low_density exponent (default 2)
  a              cheap_path slope (default 1.1)
  cheap_path_mode  auto | exact | geodesic (default auto)
  p_values       animals densities (default [1,0.5,0.25,0.125,0.0625])
  depth          encoding bit depth (default 30)
  samples        encoding sample count (default 100000)
  environments   entropy_suite mini-environments (default 100)"#;

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> serde_json::Value {
        serde_json::json!({
            "experiment": "variance_scaling",
            "d": 2,
            "law": {"family": "two_point", "a": 1.0, "b": 2.0, "p": 0.5},
            "n_values": [4, 8],
            "replications": 10,
            "master_seed": 7,
            "out_path": "out.csv"
        })
    }

    #[test]
    fn parses_with_defaults() {
        let cfg = ExperimentConfig::from_value(base()).unwrap();
        assert_eq!(cfg.pad_exponent, 0.75);
        assert_eq!(cfg.epsilons(), DEFAULT_EPSILONS.to_vec());
        let text = serde_json::to_string(&cfg).unwrap();
        assert_eq!(ExperimentConfig::from_json(&text).unwrap(), cfg);
    }

    #[test]
    fn rejects_bad_configs() {
        let bad = |k: &str, v: serde_json::Value| {
            let mut j = base();
            j[k] = v;
            ExperimentConfig::from_value(j).is_err()
        };
        assert!(bad("d", 1.into()));
        assert!(bad("d", 4.into()));
        assert!(bad("n_values", serde_json::json!([8, 4])));
        assert!(bad("replications", 1.into()));
        assert!(bad("epsilons", serde_json::json!([0.0])));
        assert!(bad("unknown_key", 1.into()));
        assert!(bad("law", serde_json::json!({"family": "uniform", "lo": 2, "hi": 1})));
        assert!(bad("experiment", "nope".into()));
    }
}

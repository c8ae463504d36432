use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand};
use fpp_core::experiments::{self, ExperimentConfig, ExperimentKind, SCHEMA};
use serde_json::Value;

#[derive(Debug, Parser)]
#[command(name = "fpp-lab", version, about = "First-passage percolation experiments", after_help = SCHEMA)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Var τ(0, n·e₁) against n and n / log n
    Variance(RunArgs),
    /// Var τ against the averaged passage time F_m
    Fm(RunArgs),
    /// Geodesic length and Geo(0, n·e₁) size
    GeoLength(RunArgs),
    /// Low-weight edges on geodesics
    LowDensity(RunArgs),
    /// Probability of a path of n edges with passage time below a·n
    CheapPath(RunArgs),
    /// Greedy lattice animals under Bernoulli weights
    Animals(RunArgs),
    /// Dyadic Bernoulli encoder checks
    Encoding(RunArgs),
    /// Randomized entropy inequality checks
    Entropy(RunArgs),
    /// Every experiment, one CSV
    All(RunArgs),
}

#[derive(Debug, clap::Args)]
struct RunArgs {
    /// JSON config file
    #[arg(long)]
    config: PathBuf,
    /// Override out_path
    #[arg(long)]
    out: Option<String>,
    /// Override master_seed
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (default: WORKERS or 1)
    #[arg(long)]
    workers: Option<usize>,
    /// Override a config key, e.g. --set law.p=0.3 or --set n_values=[8,16]
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

impl Command {
    fn parts(&self) -> (&RunArgs, Vec<ExperimentKind>) {
        use ExperimentKind as K;
        match self {
            Command::Variance(a) => (a, vec![K::VarianceScaling]),
            Command::Fm(a) => (a, vec![K::FmCompare]),
            Command::GeoLength(a) => (a, vec![K::GeoLength]),
            Command::LowDensity(a) => (a, vec![K::LowDensity]),
            Command::CheapPath(a) => (a, vec![K::CheapPath]),
            Command::Animals(a) => (a, vec![K::Animals]),
            Command::Encoding(a) => (a, vec![K::Encoding]),
            Command::Entropy(a) => (a, vec![K::EntropySuite]),
            Command::All(a) => (a, K::ALL.to_vec()),
        }
    }
}

/// Set `path` (dot-separated) in `doc` to `raw`, parsed as JSON when possible.
fn apply_override(doc: &mut Value, assignment: &str) -> Result<()> {
    let (path, raw) = assignment
        .split_once('=')
        .ok_or_else(|| anyhow!("--set expects KEY=VALUE, got {assignment:?}"))?;
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let mut cur = doc;
    let keys: Vec<&str> = path.split('.').collect();
    for (i, key) in keys.iter().enumerate() {
        let obj = cur
            .as_object_mut()
            .ok_or_else(|| anyhow!("--set {path}: {} is not an object", keys[..i].join(".")))?;
        if i + 1 == keys.len() {
            obj.insert(key.to_string(), value);
            return Ok(());
        }
        cur = obj.entry(key.to_string()).or_insert_with(|| Value::Object(Default::default()));
    }
    bail!("--set needs a non-empty key")
}

fn load_config(args: &RunArgs, kind: ExperimentKind) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(&args.config).with_context(|| format!("reading {}", args.config.display()))?;
    let mut doc: Value = serde_json::from_str(&text).with_context(|| format!("parsing {}", args.config.display()))?;
    if !doc.is_object() {
        bail!("{}: config must be a JSON object", args.config.display());
    }
    doc["experiment"] = Value::String(kind.name().to_string());
    for o in &args.overrides {
        apply_override(&mut doc, o)?;
    }
    if let Some(out) = &args.out {
        doc["out_path"] = Value::String(out.clone());
    }
    if let Some(seed) = args.seed {
        doc["master_seed"] = seed.into();
    }
    Ok(ExperimentConfig::from_value(doc)?)
}

fn run(cli: Cli) -> Result<bool> {
    let (args, kinds) = cli.command.parts();
    let cfg = load_config(args, kinds[0])?;
    let workers = match args.workers {
        Some(0) => bail!("--workers must be positive"),
        Some(w) => w,
        None => experiments::workers_from_env()?,
    };
    let summary = experiments::run_and_write(&cfg, &kinds, workers)?;
    if experiments::boundary_flagged(&summary.rows) {
        eprintln!(
            "warning: geodesics touched the box boundary in more than {:.0}% of replications; raise pad_exponent",
            experiments::BOUNDARY_FLAG_THRESHOLD * 100.0
        );
    }
    let failed = experiments::failed_checks(&summary.rows);
    for r in &failed {
        eprintln!("failed: {} n={} {}", r.experiment, r.n, r.statistic);
    }
    println!(
        "wrote {} rows to {} ({:.1} s); manifest {}",
        summary.rows.len(),
        cfg.out_path,
        summary.wall_time_secs,
        summary.manifest_path.display()
    );
    Ok(failed.is_empty())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            e.print().ok();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overrides_follow_dotted_paths() {
        let mut doc = serde_json::json!({"law": {"family": "two_point", "p": 0.5}, "d": 2});
        apply_override(&mut doc, "law.p=0.25").unwrap();
        apply_override(&mut doc, "n_values=[4,8]").unwrap();
        apply_override(&mut doc, "out_path=a.csv").unwrap();
        assert_eq!(doc["law"]["p"], 0.25);
        assert_eq!(doc["n_values"], serde_json::json!([4, 8]));
        assert_eq!(doc["out_path"], "a.csv");
        assert!(apply_override(&mut doc, "d.x=1").is_err());
        assert!(apply_override(&mut doc, "novalue").is_err());
    }
}

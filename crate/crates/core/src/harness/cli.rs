//! `allforone` command line.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::{Error, Result};
use crate::harness::{execute, fmt_float, log_grid, presets, write_atomic, ExperimentConfig, SufficientClusterConfig};
use crate::theory::{sample_complexity, table1_bound, BoundRegime};

pub const EXIT_OK: u8 = 0;
pub const EXIT_FAILURE: u8 = 1;
pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_DIVERGED: u8 = 3;

#[derive(Debug, Parser)]
#[command(name = "allforone", version, about = "Personalized collaborative SGD experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run every algorithm and seed of a configuration.
    Run(RunArgs),
    /// Sweep sufficient-cluster sizes over target excess losses.
    SufficientCluster(SweepArgs),
    /// Evaluate excess-loss bounds and the sample complexity.
    Bounds(BoundsArgs),
    /// Parse and validate a configuration without running it.
    ValidateConfig(ConfigSource),
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct ConfigSource {
    /// Path to a TOML configuration.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Built-in configuration: fig1, fig2_d2 or fig2_d10.
    #[arg(long)]
    pub preset: Option<String>,
}

impl ConfigSource {
    fn load(&self) -> Result<ExperimentConfig> {
        match (&self.config, &self.preset) {
            (Some(path), _) => ExperimentConfig::load(path),
            (None, Some(name)) => presets::load(name),
            (None, None) => Err(Error::Config("either --config or --preset is required".into())),
        }
    }
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub source: ConfigSource,
    /// Output directory; defaults to the configuration's `output_dir` or `out/<name>`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Maximum number of runs executed concurrently.
    #[arg(long, default_value_t = default_jobs())]
    pub jobs: usize,
    /// Replace the configured seeds (repeatable).
    #[arg(long = "seed-override")]
    pub seed_override: Vec<u64>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long, conflicts_with = "preset")]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub preset: Option<String>,
    /// Heterogeneity level (repeatable).
    #[arg(long = "v")]
    pub v: Vec<f64>,
    #[arg(long, default_value_t = 20)]
    pub clients: usize,
    #[arg(long, default_value_t = 2)]
    pub dim: usize,
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
    #[arg(long, default_value_t = 1e-8)]
    pub eps_min: f64,
    #[arg(long, default_value_t = 1e4)]
    pub eps_max: f64,
    #[arg(long, default_value_t = 121)]
    pub points: usize,
    /// Binary threshold; omit for the continuous criterion.
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub focal: usize,
    #[arg(long, default_value_t = 2)]
    pub threshold_exponent: u8,
    #[arg(long = "seed-override")]
    pub seed_override: Vec<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum RegimeArg {
    Constant,
    HorizonDependent,
    Decreasing,
}

impl From<RegimeArg> for BoundRegime {
    fn from(r: RegimeArg) -> Self {
        match r {
            RegimeArg::Constant => BoundRegime::Constant,
            RegimeArg::HorizonDependent => BoundRegime::HorizonDependent,
            RegimeArg::Decreasing => BoundRegime::Decreasing,
        }
    }
}

#[derive(Debug, Args)]
pub struct BoundsArgs {
    #[arg(long, value_enum)]
    pub regime: RegimeArg,
    #[arg(long)]
    pub beta: f64,
    #[arg(long)]
    pub mu: f64,
    #[arg(long)]
    pub eps0: f64,
    #[arg(long)]
    pub sigma_suf_sq: f64,
    /// Step size of the constant regime.
    #[arg(long)]
    pub eta: Option<f64>,
    /// Constant `C > 1` of the decreasing regime.
    #[arg(long)]
    pub c: Option<f64>,
    #[arg(long, default_value_t = 1000)]
    pub t_max: u64,
    /// Number of log-spaced horizons in the curve.
    #[arg(long, default_value_t = 100)]
    pub points: usize,
    /// Also print the iterations needed by the decreasing schedule to reach this excess loss.
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// CSV destination; the curve is printed to stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn default_jobs() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

/// Parses `args` (program name first) and runs the command.
pub fn run_cli<I, S>(args: I) -> ExitCode
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(&cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(Error::Config(msg)) => {
            eprintln!("configuration error:\n{msg}");
            ExitCode::from(EXIT_CONFIG)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_FAILURE)
        }
    }
}

fn dispatch(cmd: &Command) -> Result<u8> {
    match cmd {
        Command::Run(args) => cmd_run(args),
        Command::SufficientCluster(args) => cmd_sweep(args),
        Command::Bounds(args) => cmd_bounds(args),
        Command::ValidateConfig(src) => {
            let cfg = src.load()?;
            let runs = cfg.algorithms.len() * if cfg.has_training() { cfg.seeds.len() } else { 0 };
            println!("{}: valid (hash {}, {runs} runs)", cfg.name, cfg.content_hash());
            Ok(EXIT_OK)
        }
    }
}

fn output_dir(cfg: &ExperimentConfig, out: &Option<PathBuf>) -> PathBuf {
    out.clone()
        .or_else(|| cfg.output_dir.clone())
        .unwrap_or_else(|| Path::new("out").join(&cfg.name))
}

fn finish(cfg: &ExperimentConfig, out: &Option<PathBuf>, jobs: usize) -> Result<u8> {
    let dir = output_dir(cfg, out);
    let outcome = execute(cfg, &dir, jobs)?;
    println!(
        "wrote {} files and {}",
        outcome.manifest.files.len(),
        outcome.manifest_path.display()
    );
    if outcome.diverged.is_empty() {
        Ok(EXIT_OK)
    } else {
        for p in &outcome.diverged {
            eprintln!("run diverged; diagnostic record: {}", p.display());
        }
        Ok(EXIT_DIVERGED)
    }
}

fn cmd_run(args: &RunArgs) -> Result<u8> {
    let mut cfg = args.source.load()?;
    if !args.seed_override.is_empty() {
        cfg.seeds = args.seed_override.clone();
        cfg.validate()?;
    }
    finish(&cfg, &args.out, args.jobs)
}

fn cmd_sweep(args: &SweepArgs) -> Result<u8> {
    let mut cfg = match (&args.config, &args.preset) {
        (Some(path), _) => ExperimentConfig::load(path)?,
        (None, Some(name)) => presets::load(name)?,
        (None, None) => {
            if args.v.is_empty() {
                return Err(Error::Config("sufficient-cluster: give --config, --preset or at least one --v".into()));
            }
            ExperimentConfig {
                name: "sufficient_cluster".into(),
                seeds: vec![127],
                iterations: 0,
                log_every: 1,
                threshold_exponent: args.threshold_exponent,
                inner_iterations: 1,
                output_dir: None,
                objective: None,
                criterion: None,
                schedule: None,
                algorithms: Vec::new(),
                sufficient_cluster: Some(SufficientClusterConfig {
                    v: args.v.clone(),
                    clients: args.clients,
                    dim: args.dim,
                    sigma: args.sigma,
                    eps_min: args.eps_min,
                    eps_max: args.eps_max,
                    points: args.points,
                    lambda: args.lambda,
                    focal: args.focal,
                }),
            }
        }
    };
    if cfg.sufficient_cluster.is_none() {
        return Err(Error::Config("sufficient_cluster: the configuration has no [sufficient_cluster] table".into()));
    }
    // Only the sweep is run by this subcommand.
    cfg.objective = None;
    cfg.algorithms.clear();
    cfg.schedule = None;
    if !args.seed_override.is_empty() {
        cfg.seeds = args.seed_override.clone();
    }
    cfg.validate()?;
    finish(&cfg, &args.out, 1)
}

fn horizons(t_max: u64, points: usize) -> Vec<u64> {
    let mut ts: Vec<u64> = log_grid(1.0, t_max.max(1) as f64, points.max(2))
        .into_iter()
        .map(|t| t.round() as u64)
        .collect();
    ts.dedup();
    ts
}

fn cmd_bounds(args: &BoundsArgs) -> Result<u8> {
    let regime: BoundRegime = args.regime.into();
    let param = match regime {
        BoundRegime::Constant => args.eta.ok_or_else(|| Error::Config("bounds: --eta is required".into()))?,
        BoundRegime::Decreasing => args.c.ok_or_else(|| Error::Config("bounds: --c is required".into()))?,
        BoundRegime::HorizonDependent => 0.0,
    };
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Error::Io(std::io::Error::other(e));
    w.write_record(["regime", "t", "eta", "bound", "bias", "variance"]).map_err(io)?;
    for t in horizons(args.t_max, args.points) {
        let b = table1_bound(regime, args.beta, args.mu, args.eps0, args.sigma_suf_sq, t, param)
            .map_err(|e| Error::Config(format!("bounds (T={t}): {e}")))?;
        w.write_record([
            regime.label().to_string(),
            t.to_string(),
            fmt_float(b.inputs.eta_or_c),
            fmt_float(b.bound_at_t),
            fmt_float(b.bias),
            fmt_float(b.variance),
        ])
        .map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(std::io::Error::other(e.to_string())))?;
    match &args.out {
        Some(path) => {
            write_atomic(path, &bytes)?;
            println!("wrote {}", path.display());
        }
        None => print!("{}", String::from_utf8_lossy(&bytes)),
    }
    if let Some(eps) = args.epsilon {
        let c = args.c.ok_or_else(|| Error::Config("bounds: --epsilon needs --c".into()))?;
        let n = sample_complexity(eps, args.beta, args.mu, args.sigma_suf_sq, c)
            .map_err(|e| Error::Config(format!("bounds: {e}")))?;
        println!("sample_complexity epsilon={eps} T={n}");
    }
    Ok(EXIT_OK)
}

//! Batch runner: parse a config, run one experiment, write CSV tables and a manifest.
//!
//! Exit codes: 0 all checks pass, 1 a tolerance check failed, 2 the command line or
//! config is invalid, 3 a truncation budget or resource limit was exceeded, 4 I/O.
//! Nothing is written on exit 2 or 3.

pub mod config;
pub mod experiments;
pub mod report;
pub mod sample;

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use fockbench_core::homodyne::Rounding;
use fockbench_core::FockError;

use crate::config::{Experiment, ExperimentConfig};
use crate::experiments::{sampling_distribution, RunOptions};
use crate::report::{Check, Report, Table};

pub const ENV_OUT: &str = "FOCKBENCH_OUT";
pub const DEFAULT_OUT: &str = "fockbench-out";

#[derive(Debug, Parser)]
#[command(name = "fockbench", version, about = "Homodyne detection and teleportation benchmarks in truncated Fock space")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Projector algebra, beamsplitter unitarity and the phase-integral identity.
    Structural(RunArgs),
    /// Count-difference distribution against its Gaussian limit.
    Distribution(RunArgs),
    /// Conditional collapse kernels against the rank-one quadrature limit.
    Collapse(RunArgs),
    /// Count-interval collapse against quadrature-interval collapse.
    Pitop(RunArgs),
    /// Scalar limit lemmas.
    Asymptotics(RunArgs),
    /// Ideal and homodyne teleportation fidelities.
    Teleport(RunArgs),
    /// Seeded draws from the count-difference distribution (distribution config).
    Sample(RunArgs),
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Worker threads for sweep points; results keep sweep order.
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Convert quadratures to counts with floor instead of nearest.
    #[arg(long)]
    pub floor_l: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exit {
    Ok = 0,
    Tolerance = 1,
    Parse = 2,
    Budget = 3,
    Io = 4,
}

#[derive(Debug)]
pub enum RunError {
    Parse(String),
    Budget(String),
    Io(String),
}

impl RunError {
    pub fn exit(&self) -> Exit {
        match self {
            RunError::Parse(_) => Exit::Parse,
            RunError::Budget(_) => Exit::Budget,
            RunError::Io(_) => Exit::Io,
        }
    }
}

impl std::fmt::Display for RunError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RunError::Parse(m) => write!(f, "config error: {m}"),
            RunError::Budget(m) => write!(f, "truncation budget: {m}"),
            RunError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl From<FockError> for RunError {
    fn from(e: FockError) -> Self {
        match e {
            FockError::Precision { .. } | FockError::Resource(_) => RunError::Budget(e.to_string()),
            other => RunError::Parse(other.to_string()),
        }
    }
}

impl Command {
    fn parts(&self) -> (&'static str, &RunArgs) {
        match self {
            Command::Structural(a) => ("structural", a),
            Command::Distribution(a) => ("distribution", a),
            Command::Collapse(a) => ("collapse", a),
            Command::Pitop(a) => ("pitop", a),
            Command::Asymptotics(a) => ("asymptotics", a),
            Command::Teleport(a) => ("teleport", a),
            Command::Sample(a) => ("sample", a),
        }
    }

    fn expected(&self) -> Experiment {
        match self {
            Command::Structural(_) => Experiment::Structural,
            Command::Distribution(_) | Command::Sample(_) => Experiment::Distribution,
            Command::Collapse(_) => Experiment::Collapse,
            Command::Pitop(_) => Experiment::Pitop,
            Command::Asymptotics(_) => Experiment::Asymptotics,
            Command::Teleport(_) => Experiment::Teleport,
        }
    }
}

/// Output directory: `FOCKBENCH_OUT`, else the config's `output_dir`, else a default.
pub fn output_dir(cfg: &ExperimentConfig, env: Option<PathBuf>) -> PathBuf {
    env.or_else(|| cfg.output_dir.clone()).unwrap_or_else(|| PathBuf::from(DEFAULT_OUT))
}

pub fn sample_report(cfg: &ExperimentConfig) -> Result<Report, FockError> {
    use rayon::prelude::*;
    let alphas = cfg.sweep.alpha_mag.clone().unwrap_or_else(|| vec![8.0]);
    let betas = cfg.sweep.beta.clone().unwrap_or_else(|| vec![0.0]);
    let n = cfg.sweep.n_shots.unwrap_or(100_000);
    let points: Vec<(f64, f64)> = betas.iter().flat_map(|&b| alphas.iter().map(move |&a| (b, a))).collect();
    let results: Vec<_> = points
        .par_iter()
        .enumerate()
        .map(|(i, &(beta, mag))| {
            let d = sampling_distribution(beta, mag, cfg.sweep.cutoff)?;
            let hist = sample::sample_outcomes(&d, n, cfg.seed, i as u64);
            Ok((d, hist))
        })
        .collect::<Result<_, FockError>>()?;
    let mut t = Table::new(
        "sample.csv",
        &[
            ("alpha_mag", "oscillator amplitude |alpha|"),
            ("beta", "signal amplitude"),
            ("l", "count difference outcome"),
            ("count", "draws equal to l"),
            ("empirical", "count/n_shots"),
            ("exact", "exact P(l)/sum P"),
        ],
    );
    let mut report = Report::default();
    for (&(beta, mag), (d, hist)) in points.iter().zip(&results) {
        for (&l, &c) in hist {
            t.push(vec![
                mag.into(),
                beta.into(),
                l.into(),
                (c as i64).into(),
                (c as f64 / n as f64).into(),
                (d.prob(l) / d.total()).into(),
            ]);
        }
        let se = (d.variance() / n as f64).sqrt();
        let dev = (sample::empirical_mean(hist) - d.mean()).abs();
        let sig = cfg.tolerance.sigmas();
        report.checks.push(
            Check::within(format!("sample mean within {sig} standard errors (|alpha|={mag}, beta={beta})"), dev, sig * se)
                .with_detail(format!("n_shots={n}, exact mean {:.6e}", d.mean())),
        );
    }
    report.tables.push(t);
    Ok(report)
}

pub fn run_experiment(cfg: &ExperimentConfig, sub: &str, opts: RunOptions) -> Result<Report, FockError> {
    match (sub, cfg.experiment) {
        ("sample", _) => sample_report(cfg),
        (_, Experiment::Structural) => experiments::structural(cfg, opts),
        (_, Experiment::Distribution) => experiments::distribution(cfg, opts),
        (_, Experiment::Collapse) => experiments::collapse(cfg, opts),
        (_, Experiment::Pitop) => experiments::pitop(cfg, opts),
        (_, Experiment::Asymptotics) => experiments::asymptotics(cfg, opts),
        (_, Experiment::Teleport) => experiments::teleport(cfg, opts),
    }
}

fn load(path: &Path) -> Result<ExperimentConfig, RunError> {
    ExperimentConfig::load(path).map_err(|e| RunError::Parse(e.0))
}

/// Runs a parsed command line; returns the exit status and the manifest path if one was written.
pub fn execute(cli: &Cli) -> Result<(Exit, PathBuf), RunError> {
    let (sub, args) = cli.command.parts();
    let cfg = load(&args.config)?;
    if cfg.experiment != cli.command.expected() {
        return Err(RunError::Parse(format!(
            "subcommand `{sub}` cannot run a `{}` config",
            cfg.experiment
        )));
    }
    if args.jobs == Some(0) {
        return Err(RunError::Parse("--jobs must be at least 1".into()));
    }
    let opts = RunOptions { rounding: if args.floor_l { Rounding::Floor } else { Rounding::Nearest } };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.jobs.unwrap_or(0))
        .build()
        .map_err(|e| RunError::Io(e.to_string()))?;

    let start = Instant::now();
    let report = pool.install(|| run_experiment(&cfg, sub, opts))?;
    let wall = start.elapsed().as_secs_f64();

    let snapshot = serde_json::to_value(&cfg).map_err(|e| RunError::Io(e.to_string()))?;
    let manifest = report::manifest(sub, &snapshot, &report, wall);
    let mut dir = output_dir(&cfg, std::env::var_os(ENV_OUT).map(PathBuf::from));
    if sub == "sample" {
        // Shares its config with `distribution`; keep the two manifests apart.
        dir.push("sample");
    }
    report::write_all(&dir, &report, &manifest).map_err(|e| RunError::Io(format!("{}: {e}", dir.display())))?;
    for c in report.checks.iter().filter(|c| !c.pass) {
        eprintln!("FAIL {}: {:.6e} {}", c.name, c.value, c.detail);
    }
    let exit = if report.pass() { Exit::Ok } else { Exit::Tolerance };
    Ok((exit, dir.join("manifest.json")))
}

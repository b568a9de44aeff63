//! Experiment runner: configures pairs, students and reduction parameters,
//! runs one subcommand with deterministic seeding, and writes a JSON report.

pub mod commands;
pub mod config;
pub mod report;

use std::path::PathBuf;
use std::time::Instant;

use clap::{Parser, Subcommand};

use commands::{CliError, CommandOutput, RunOptions, EXIT_CONFIG};
use config::{ConfigError, ExperimentConfig};
use report::{write_atomic, RunReport};

/// Overrides the worker count and nothing else.
pub const WORKERS_ENV: &str = "KPTLAB_WORKERS";

#[derive(Debug, Parser)]
#[command(name = "kptlab", version, about = "KPT interpolation game and reduction laboratory")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Flat `key = value` config file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Master seed; overrides `master_seed` in the config.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Report path; the report goes to stdout when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    #[arg(long, global = true)]
    pub workers: Option<usize>,

    /// Include raw advice strings and witnesses in reduction reports.
    #[arg(long, global = true)]
    pub emit_witnesses: bool,

    /// Export the disjunction as DIMACS files (validity).
    #[arg(long, global = true)]
    pub dimacs_dir: Option<PathBuf>,

    /// Config override, repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    pub set: Vec<String>,

    /// Record wall time in the report (breaks byte-for-byte reproducibility).
    #[arg(long, global = true)]
    pub timing: bool,
}

#[derive(Debug, Clone, Copy, Subcommand)]
pub enum Command {
    /// Exhaustive hypothesis checks on the pair.
    CheckPair,
    /// Semantic validity of the induction disjunction.
    Validity,
    /// Games of the configured student against the honest teacher.
    Play,
    /// Round-1 frequency table, γ and adjacent gaps.
    Claim2,
    /// The reduction and the advantage of its distinguisher.
    Reduce,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::CheckPair => "check-pair",
            Command::Validity => "validity",
            Command::Play => "play",
            Command::Claim2 => "claim2",
            Command::Reduce => "reduce",
        }
    }
}

/// Config file, then `--set`, then the dedicated flags.
pub fn resolve_config(cli: &Cli) -> Result<ExperimentConfig, ConfigError> {
    let mut pairs = match &cli.config {
        Some(path) => config::read_pairs(path)?,
        None => Default::default(),
    };
    for kv in &cli.set {
        let (k, v) = kv.split_once('=').ok_or(ConfigError::Syntax { line: 0 })?;
        pairs.insert(k.trim().to_owned(), v.trim().to_owned());
    }
    if let Some(seed) = cli.seed {
        pairs.insert("master_seed".into(), seed.to_string());
    }
    let mut cfg = ExperimentConfig::from_pairs(pairs)?;
    if let Some(dir) = &cli.dimacs_dir {
        cfg.dimacs_dir = Some(dir.clone());
    }
    Ok(cfg)
}

/// Flag, then environment, then config; `None` lets rayon decide.
pub fn resolve_workers(cli: &Cli, cfg: &ExperimentConfig) -> Result<Option<usize>, ConfigError> {
    if let Some(w) = cli.workers {
        return Ok(Some(w));
    }
    if let Ok(v) = std::env::var(WORKERS_ENV) {
        let w = v.trim().parse().map_err(|_| ConfigError::BadValue {
            key: WORKERS_ENV.into(),
            value: v.clone(),
            why: "expected a positive integer".into(),
        })?;
        return Ok(Some(w));
    }
    Ok(cfg.workers)
}

fn dispatch(command: Command, cfg: &ExperimentConfig, opts: &RunOptions) -> Result<CommandOutput, CliError> {
    match command {
        Command::CheckPair => commands::cmd_check_pair(cfg),
        Command::Validity => commands::cmd_validity(cfg),
        Command::Play => commands::cmd_play(cfg),
        Command::Claim2 => commands::cmd_claim2(cfg),
        Command::Reduce => commands::cmd_reduce(cfg, opts),
    }
}

/// Runs one command and returns the report with its exit code.
pub fn execute(cli: &Cli) -> Result<RunReport, CliError> {
    let cfg = resolve_config(cli)?;
    let workers = resolve_workers(cli, &cfg)?;
    if workers == Some(0) {
        return Err(ConfigError::Invalid("workers must be positive".into()).into());
    }
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(w) = workers {
        builder = builder.num_threads(w);
    }
    let pool = builder.build().map_err(|e| ConfigError::Invalid(e.to_string()))?;
    let opts = RunOptions { emit_witnesses: cli.emit_witnesses };
    let start = Instant::now();
    let out = pool.install(|| dispatch(cli.command, &cfg, &opts))?;
    let mut report = RunReport::new(cli.command.name(), &cfg, out.payload, out.exit_code);
    if cli.timing {
        report.wall_time_ms = Some(start.elapsed().as_millis());
    }
    Ok(report)
}

/// Parses `args`, runs, writes the report; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { 0 };
        }
    };
    let report = match execute(&cli) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("kptlab {}: {e}", cli.command.name());
            return EXIT_CONFIG;
        }
    };
    let json = report.to_json();
    match &cli.out {
        Some(path) => {
            if let Err(e) = write_atomic(path, json.as_bytes()) {
                eprintln!("kptlab: cannot write {}: {e}", path.display());
                return EXIT_CONFIG;
            }
            eprintln!("kptlab {}: exit {} -> {}", cli.command.name(), report.exit_code, path.display());
        }
        None => print!("{json}"),
    }
    report.exit_code
}

mod commands;
mod config;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use thiserror::Error;

use config::RunConfig;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("numerical degeneracy: {0}")]
    Degenerate(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            Self::Io(_) => 1,
            Self::Config(_) => 2,
            Self::Degenerate(_) => 3,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "pairscope", version, about = "Correlated-photon transmittance estimation and scan simulation")]
struct Cli {
    /// TOML run configuration; every key has a default.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides `rng_seed`.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Overrides `output_dir`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads. Affects speed only.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, Subcommand)]
enum Command {
    /// Single-pass, double-pass and coherent precision over a t grid.
    PrecisionSweep,
    /// Crossover transmittance of single and double pass.
    Critical,
    /// Normal-order coefficient table.
    Coeffs,
    /// Counting simulation scored against the analytic model.
    Montecarlo,
    /// Single- and multi-pass scans of a sample map.
    Scan,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Self::PrecisionSweep => "precision-sweep",
            Self::Critical => "critical",
            Self::Coeffs => "coeffs",
            Self::Montecarlo => "montecarlo",
            Self::Scan => "scan",
        }
    }
}

fn load(cli: &Cli) -> Result<(RunConfig, PathBuf), CliError> {
    let (mut cfg, base) = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
            let cfg = RunConfig::parse(&text)?;
            let base = path.parent().map(PathBuf::from).unwrap_or_default();
            (cfg, base)
        }
        None => (RunConfig::default(), PathBuf::new()),
    };
    if let Some(seed) = cli.seed {
        cfg.rng_seed = seed;
    }
    if let Some(out) = &cli.out {
        cfg.output_dir = out.clone();
    }
    Ok((cfg, base))
}

fn run(cli: &Cli) -> Result<(), CliError> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Config("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    }
    let (cfg, base) = load(cli)?;
    let output = match cli.command {
        Command::PrecisionSweep => commands::precision_sweep(&cfg)?,
        Command::Critical => commands::critical(&cfg)?,
        Command::Coeffs => commands::coeffs(&cfg)?,
        Command::Montecarlo => commands::montecarlo(&cfg)?,
        Command::Scan => commands::scan(&cfg, &base)?,
    };
    manifest::write(&cfg, cli.command.name(), &output)?;
    match output.degenerate {
        Some(reason) => Err(CliError::Degenerate(reason)),
        None => Ok(()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("pairscope: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use harmonic_paths::SmearingMode;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Compute(#[from] harmonic_paths::Error),
    #[error("{failed} validation check(s) failed")]
    Validation { failed: usize },
    #[error("cannot write output: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            _ => 3,
        }
    }

    fn category(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Compute(e) => e.category(),
            CliError::Validation { .. } => "validation",
            CliError::Io(_) => "io",
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModeArg {
    Fresnel,
    Euclidean,
}

impl From<ModeArg> for SmearingMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Fresnel => SmearingMode::Fresnel,
            ModeArg::Euclidean => SmearingMode::Euclidean,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "harmonic-paths",
    version,
    about = "Forced harmonic oscillator path integrals"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, clap::Args)]
struct Common {
    /// TOML configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Output file; written only on success.
    #[arg(long)]
    out: PathBuf,
    /// Worker threads for parallel sections.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Green functions on a uniform grid, or the fundamental pair, as CSV.
    Greens(Common),
    /// Amplitude or closed-path generating functional as JSON.
    Amplitude(Common),
    /// Smeared correlator as JSON.
    Correlator {
        #[command(flatten)]
        common: Common,
        /// Overrides the mode given in the config.
        #[arg(long, value_enum)]
        mode: Option<ModeArg>,
    },
    /// Second-order connected diagram census.
    Diagrams(Common),
    /// Internal consistency battery.
    #[command(hide = true)]
    Validate(Common),
}

fn run(cli: Cli) -> Result<(), CliError> {
    let (common, mode) = match &cli.command {
        Command::Greens(c)
        | Command::Amplitude(c)
        | Command::Diagrams(c)
        | Command::Validate(c) => (c, None),
        Command::Correlator { common, mode } => (common, mode.map(SmearingMode::from)),
    };
    let loaded = config::load(&common.config)?;
    if let Some(n) = common.threads {
        if n == 0 {
            return Err(CliError::Config("--threads must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(e.to_string()))?;
    }
    let output = match &cli.command {
        Command::Greens(_) => commands::greens(&loaded)?,
        Command::Amplitude(_) => commands::amplitude(&loaded)?,
        Command::Correlator { .. } => commands::correlator(&loaded, mode)?,
        Command::Diagrams(_) => commands::diagrams(&loaded)?,
        Command::Validate(_) => commands::validate()?,
    };
    std::fs::write(&common.out, output)?;
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error[{}]: {e}", e.category());
            ExitCode::from(e.exit_code())
        }
    }
}

//! `polyheat`: reproducible experiments on polyharmonic heat kernels.
//!
//! Exit status: 0 when every check passes, 1 on a usage error, 2 when a
//! check fails or a numerical tolerance is exceeded; the last case also
//! writes `failure.json` into the output directory.

mod commands;
mod config;
mod report;

use clap::{Args, Parser, Subcommand};
use config::{Settings, OUT_ENV};
use serde::Serialize;
use std::path::PathBuf;
use std::process::ExitCode;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error(transparent)]
    Core(#[from] polyheat::Error),

    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization: {0}")]
    Serialization(String),
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Serialization(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Serialization(e.to_string())
    }
}

impl CliError {
    /// Invalid parameters are usage errors; a failed accuracy or
    /// truncation guard is a tolerance failure.
    fn is_numerical(&self) -> bool {
        use polyheat::Error as E;
        matches!(
            self,
            CliError::Core(
                E::Accuracy { .. }
                    | E::Truncation { .. }
                    | E::Evaluation { .. }
                    | E::Degenerate(_)
                    | E::InsufficientData(_)
            )
        )
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "polyheat",
    version,
    about = "Polyharmonic heat kernels and the Cauchy problem"
)]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct GlobalArgs {
    /// Flat `key = value` file; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory; overrides POLYHEAT_OUT and the config file.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Seed for randomized searches.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads for parallel loops.
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Kernel profile, sign changes, constants and envelope fit.
    Kernel(commands::kernel::KernelArgs),
    /// Moments of the stationary profile with predicted and observed signs.
    Moments(commands::moments::MomentsArgs),
    /// Cauchy problem on a periodic box, with conservation checks.
    Solve(commands::solve::SolveArgs),
    /// Fokker–Planck eigenfunctions and moment trajectories.
    Fp(commands::fp::FpArgs),
    /// Positivity scans, decay plateaus and the negativity search.
    Positivity(commands::positivity::PositivityArgs),
}

/// Settings shared by every command, echoed in each report.
#[derive(Debug, Clone, Serialize)]
pub struct Common {
    pub seed: u64,
    pub threads: usize,
}

/// Resolved settings of a run.
pub struct Context {
    pub settings: Settings,
    pub common: Common,
    pub out: PathBuf,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("polyheat: a check failed; see failure.json");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("polyheat: {e}");
            ExitCode::from(if e.is_numerical() { 2 } else { 1 })
        }
    }
}

fn run(cli: Cli) -> Result<bool, CliError> {
    let settings = Settings::from_file(cli.global.config.as_deref())?;
    let common = Common {
        seed: settings.value("seed", cli.global.seed, 0)?,
        threads: settings.value("threads", cli.global.threads, 1)?,
    };
    if common.threads == 0 {
        return Err(CliError::Usage("--threads must be at least 1".into()));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(common.threads)
        .build_global()
        .map_err(|e| CliError::Usage(format!("cannot start thread pool: {e}")))?;
    let out = settings.out_dir(cli.global.out, std::env::var(OUT_ENV).ok())?;
    let ctx = Context { settings, common, out };
    match cli.command {
        Command::Kernel(a) => commands::kernel::run(a, &ctx),
        Command::Moments(a) => commands::moments::run(a, &ctx),
        Command::Solve(a) => commands::solve::run(a, &ctx),
        Command::Fp(a) => commands::fp::run(a, &ctx),
        Command::Positivity(a) => commands::positivity::run(a, &ctx),
    }
}

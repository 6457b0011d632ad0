//! `conewave` command-line driver: kernel scans, propagation, estimate
//! studies, wedge solves and the verification suite, all written as CSV and
//! JSON.

mod commands;
mod config;
mod output;

use std::process::ExitCode;

use clap::{CommandFactory, Parser, Subcommand};
use conewave::ConeError;

use crate::config::{ConfigFile, Resolver};

#[derive(Debug, Parser)]
#[command(name = "conewave", version, about = "Wave propagation on flat two-dimensional cones")]
pub struct Cli {
    /// Flat `key = value` file supplying defaults for any option.
    #[arg(long, global = true)]
    config: Option<String>,

    /// Worker threads; outputs do not depend on this.
    #[arg(long, global = true, env = "CONEWAVE_THREADS")]
    threads: Option<usize>,

    /// Seed for random draws.
    #[arg(long, global = true)]
    seed: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate the sine-propagator kernel on a tensor grid of arguments.
    Kernel(commands::KernelArgs),
    /// Propagate a Gaussian blob with the spectral solver, optionally
    /// compared with kernel quadrature.
    Propagate(commands::PropagateArgs),
    /// Fit the decay rate of frequency-localized sup norms.
    Dispersive(commands::DispersiveArgs),
    /// Strichartz ratios of rescaled band-limited data.
    Strichartz(commands::StrichartzArgs),
    /// Morawetz ratios of random data against probe constants.
    Morawetz(commands::MorawetzArgs),
    /// Solve a wedge problem, with the image oracle when the angle is π/N.
    Wedge(commands::WedgeArgs),
    /// Run the acceptance checks and write their tables.
    Verify(commands::VerifyArgs),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Kernel(_) => "kernel",
            Command::Propagate(_) => "propagate",
            Command::Dispersive(_) => "dispersive",
            Command::Strichartz(_) => "strichartz",
            Command::Morawetz(_) => "morawetz",
            Command::Wedge(_) => "wedge",
            Command::Verify(_) => "verify",
        }
    }
}

#[derive(Debug)]
pub enum CliError {
    /// Missing or malformed arguments; usage is printed.
    Usage(String),
    /// Parameters out of range or unreadable files.
    Invalid(String),
    /// The run completed but missed its accuracy target or check.
    Failed(String),
}

impl From<ConeError> for CliError {
    fn from(e: ConeError) -> Self {
        match e {
            ConeError::InvalidParameter { .. } | ConeError::Aliasing { .. } | ConeError::Dimension(_) => {
                CliError::Invalid(e.to_string())
            }
            ConeError::BesselRange { .. } | ConeError::RefinementBudget { .. } => CliError::Failed(e.to_string()),
        }
    }
}

fn init_threads(file: &ConfigFile, flag: Option<usize>) -> Result<(), CliError> {
    // Thread count is deliberately kept out of the resolved parameters.
    let mut scratch = Resolver::new(file);
    let n = scratch.get("threads", flag, 0usize)?;
    if n > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Invalid(format!("cannot start {n} threads: {e}")))?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    let file = match &cli.config {
        Some(p) => ConfigFile::load(p)?,
        None => ConfigFile::default(),
    };
    init_threads(&file, cli.threads)?;
    let mut cfg = Resolver::new(&file);
    let seed = cfg.get("seed", cli.seed, 20241016u64)?;
    match &cli.command {
        Command::Kernel(a) => commands::kernel(a, &mut cfg),
        Command::Propagate(a) => commands::propagate(a, &mut cfg),
        Command::Dispersive(a) => commands::dispersive(a, &mut cfg),
        Command::Strichartz(a) => commands::strichartz(a, &mut cfg),
        Command::Morawetz(a) => commands::morawetz(a, &mut cfg, seed),
        Command::Wedge(a) => commands::wedge(a, &mut cfg),
        Command::Verify(a) => commands::verify(a, &mut cfg, seed),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let name = cli.command.name();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            let mut cmd = Cli::command();
            cmd.build();
            let usage = cmd
                .find_subcommand_mut(name)
                .map(|c| c.render_usage().to_string())
                .unwrap_or_default();
            eprintln!("error: {msg}\n\n{usage}\n\nFor more information, try 'conewave {name} --help'.");
            ExitCode::from(2)
        }
        Err(CliError::Invalid(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Failed(msg)) => {
            eprintln!("failed: {msg}");
            ExitCode::from(3)
        }
    }
}

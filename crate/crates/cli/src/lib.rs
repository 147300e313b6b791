//! `ymtorus`: sample, flow and measure gauge fields on the 3-torus from a
//! plain-text run configuration.

pub mod commands;
pub mod config;
pub mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

pub use config::RunConfig;
pub use error::CliError;

/// Environment variable that overrides the output directory of the config
/// file (but not `--output`).
pub const OUTPUT_ENV: &str = "YMTORUS_OUTPUT";

#[derive(Debug, Parser)]
#[command(name = "ymtorus", version, about = "Gauge-field heat flows and Wilson loops on the 3-torus")]
pub struct Cli {
    /// Worker threads; results do not depend on this.
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    #[arg(long, value_name = "PATH")]
    pub config: PathBuf,

    /// Overrides `sampler.seed`.
    #[arg(long)]
    pub seed: Option<u64>,

    /// Overrides `YMTORUS_OUTPUT` and `output.dir`.
    #[arg(long, value_name = "DIR")]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Draw one random connection and write it as a field checkpoint.
    Sample(#[command(flatten)] Common),

    /// Integrate a field checkpoint with the configured flow.
    Flow {
        #[command(flatten)]
        common: Common,
        /// Initial field checkpoint.
        #[arg(long, value_name = "PATH")]
        input: PathBuf,
        /// Continue from the final state recorded in the output directory.
        #[arg(long)]
        resume: bool,
    },

    /// Evaluate Wilson loops of a field, flowed to the configured times.
    Wilson {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_name = "PATH")]
        input: PathBuf,
        /// Loop definition file; overrides `wilson.loops`.
        #[arg(long, value_name = "PATH")]
        loops: Option<PathBuf>,
    },

    /// Run a seeded ensemble over several cutoffs and write records and reports.
    Ensemble {
        #[command(flatten)]
        common: Common,
        /// Complete a partial run from the existing records file.
        #[arg(long)]
        resume: bool,
    },

    /// Run the built-in property suites.
    Verify {
        #[arg(long, value_enum, hide = true)]
        inject_fault: Option<Fault>,
    },
}

/// Deliberate defects used to check that `verify` notices them.
#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Fault {
    /// Flip the sign of the commutator terms in the explicit ZDDS right-hand side.
    ZddsSign,
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Config("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(format!("cannot configure thread pool: {e}")))?;
    }
    match cli.command {
        Command::Sample(common) => commands::sample(&common),
        Command::Flow { common, input, resume } => commands::flow(&common, &input, resume),
        Command::Wilson { common, input, loops } => commands::wilson(&common, &input, loops.as_deref()),
        Command::Ensemble { common, resume } => commands::ensemble(&common, resume),
        Command::Verify { inject_fault } => commands::verify(inject_fault),
    }
}

pub fn main_with_args() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

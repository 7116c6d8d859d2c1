//! `galine`: verification suites and simulations for projective representations
//! of the Galilean line group.
//!
//! Exit codes: 0 when every check passes, 1 when a check fails or a run aborts,
//! 2 for usage and configuration errors.

mod commands;
mod json;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(name = "galine", version, about = "Galilean line group cocycles, representations and frame dynamics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Scenario JSON. Without it the minimal spec with m = 1 is used.
    #[arg(long, value_name = "PATH")]
    pub scenario: Option<PathBuf>,
    /// Seed for every sampled check.
    #[arg(long, default_value_t = 1, value_name = "U64")]
    pub seed: u64,
    /// Output directory, created if missing.
    #[arg(long, default_value = "out", value_name = "DIR")]
    pub out: PathBuf,
    /// Tolerance for floating-point verdicts (command-specific default).
    #[arg(long, value_name = "FLOAT")]
    pub tol: Option<f64>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run the identity suites and write verify.json.
    Verify {
        #[command(flatten)]
        common: Common,
        /// Comma-separated suite names (default: dd-zero, cocycle-condition,
        /// galilei-reduction, composition-defect, commutator).
        #[arg(long, value_delimiter = ',', value_name = "NAME[,NAME...]")]
        suite: Vec<String>,
        /// Replace ω by a corrupted cochain and B by a nonlinear map.
        #[arg(long)]
        negative_control: bool,
        /// Samples per suite instead of the suite default.
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Check that the scenario's ω is an embeddable two-cocycle.
    CocycleCheck {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        negative_control: bool,
    },
    /// Dump P, K, X and the frame Hamiltonian and check their commutators.
    Commutators {
        #[command(flatten)]
        common: Common,
    },
    /// Evolve the scenario's packet in its frame and compare with the minimal spec.
    Evolve {
        #[command(flatten)]
        common: Common,
        /// `beta<n>=v1,v2,...` or `gamma<n>=...`: one run per value plus a diff summary.
        #[arg(long, value_name = "KEY=V1,V2,...")]
        sweep: Option<String>,
    },
    /// Integrate the transformed classical Hamiltonian for each mass.
    Classical {
        #[command(flatten)]
        common: Common,
    },
    /// Aggregate the JSON reports in the output directory.
    Report {
        /// Directory holding earlier outputs.
        #[arg(long, default_value = "out", value_name = "DIR")]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("GALINE_LOG", "warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Verify { common, suite, negative_control, samples } => {
            commands::verify(&common, &suite, negative_control, samples)
        }
        Command::CocycleCheck { common, negative_control } => commands::cocycle_check(&common, negative_control),
        Command::Commutators { common } => commands::commutators(&common),
        Command::Evolve { common, sweep } => commands::evolve(&common, sweep.as_deref()),
        Command::Classical { common } => commands::classical(&common),
        Command::Report { out } => commands::report(&out),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(commands::Failure::Config(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
        Err(commands::Failure::Run(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

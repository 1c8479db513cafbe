//! `nla`: figure data and self-validation for the noiseless linear amplifier.

mod commands;
mod grid;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use output::Format;

#[derive(Parser, Debug)]
#[command(
    name = "nla",
    version,
    about = "Optimal measurement-based noiseless linear amplifier"
)]
#[command(args_override_self = true)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Output format.
    #[arg(long, value_enum, default_value = "csv", global = true)]
    pub format: Format,
    /// Write to FILE instead of stdout.
    #[arg(long, value_name = "FILE", global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads for sweeps (0 = all cores).
    #[arg(long, env = "NLA_JOBS", default_value_t = 0, global = true)]
    pub jobs: usize,
    /// Record the current time in the manifest. `SOURCE_DATE_EPOCH` takes
    /// precedence when set.
    #[arg(long, global = true)]
    pub timestamp: bool,
}

#[derive(Args, Debug, Clone)]
pub struct GainRange {
    #[arg(long, default_value_t = 1.0)]
    pub g_min: f64,
    #[arg(long, default_value_t = 4.0)]
    pub g_max: f64,
    #[arg(long, default_value_t = 61)]
    pub g_steps: usize,
    /// Space gains logarithmically.
    #[arg(long)]
    pub log: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Success probability and fidelity for a coherent input.
    Coherent(commands::CoherentArgs),
    /// Amplified one-sided lossy EPR state at a fixed target squeezing.
    Epr(commands::EprArgs),
    /// Lowest EPR criterion under fidelity and probability floors, per eta.
    Optimize(commands::OptimizeArgs),
    /// Closed forms against the Fock-space oracle, plus operator identities.
    Validate(commands::ValidateArgs),
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.common.jobs)
        .build()
        .expect("thread pool");
    let result = pool.install(|| match cli.command {
        Command::Coherent(a) => commands::coherent(&a, &cli.common),
        Command::Epr(a) => commands::epr(&a, &cli.common),
        Command::Optimize(a) => commands::optimize(&a, &cli.common),
        Command::Validate(a) => commands::validate(&a, &cli.common),
    });
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}

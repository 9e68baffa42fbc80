//! Command-line experiment runner.
//!
//! Exit codes: 0 success or pass, 1 usage or internal error, 2 a protocol
//! or verification failure.

mod commands;
mod config_file;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "qkdnet", version, about = "Center-mediated multiparty QKD simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate a protocol run and write its transcript.
    Run(RunArgs),
    /// Generate a purity-testing family and audit its error exactly.
    AuditCode(AuditArgs),
    /// Run the randomized fidelity-inequality suite.
    VerifyInequalities(VerifyArgs),
    /// Replay the correlation-table checks by dense simulation.
    Tables(TablesArgs),
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u8).range(1..=2))]
    pub protocol: u8,
    #[arg(long, default_value_t = 2)]
    pub n: usize,
    #[arg(long, default_value_t = 1)]
    pub m: usize,
    #[arg(long, default_value_t = 2)]
    pub t: usize,
    #[arg(long, default_value_t = 100)]
    pub rounds: usize,
    #[arg(long, default_value_t = 0.25)]
    pub test_fraction: f64,
    /// Required unless the config file sets `run.seed`.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Transcript path (JSON lines).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Comma-separated attacks, e.g. `intercept@member1`.
    #[arg(long, default_value = "")]
    pub adversary: String,
    #[arg(long)]
    pub no_auth: bool,
    #[arg(long, default_value_t = 2)]
    pub family_r: usize,
    #[arg(long, default_value_t = 2)]
    pub family_s: usize,
    #[arg(long)]
    pub family_keys: Option<usize>,
    #[arg(long)]
    pub shared_family: bool,
    #[arg(long, default_value_t = 0)]
    pub collector_a: usize,
    #[arg(long, default_value_t = 0)]
    pub collector_b: usize,
    /// Fault injection: the center never announces its outcomes.
    #[arg(long)]
    pub center_withholds: bool,
    /// Keep outcomes and keys in the transcript.
    #[arg(long)]
    pub reveal_secrets: bool,
    /// Config file whose entries override these flags.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AuditArgs {
    #[arg(long)]
    pub r: usize,
    #[arg(long)]
    pub s: usize,
    #[arg(long)]
    pub seed: u64,
    #[arg(long)]
    pub keys: Option<usize>,
    /// Audit this many random Paulis instead of enumerating.
    #[arg(long)]
    pub sampled: Option<usize>,
    /// Family JSON with the audit result.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Debugging aid: keep only the first code, which must fail the audit.
    #[arg(long, hide = true)]
    pub debug_degenerate: bool,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, default_value_t = 1000, value_parser = clap::value_parser!(u64).range(1..))]
    pub trials: u64,
    /// Dimensions as a range `2-8` or a list `2,4,8`.
    #[arg(long, default_value = "2-8")]
    pub dims: String,
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 50, value_parser = clap::value_parser!(u64).range(1..))]
    pub channel_draws: u64,
    #[arg(long, default_value_t = 20, value_parser = clap::value_parser!(u64).range(1..))]
    pub composed_draws: u64,
    #[arg(long, default_value_t = 1000)]
    pub haar_samples: usize,
    /// JSON report path.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Per-trial CSV path.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TablesArgs {
    #[arg(long, default_value_t = 10_000)]
    pub shots: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 6)]
    pub max_n: usize,
    #[arg(long, default_value_t = 5)]
    pub max_n_center: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let informational = matches!(
                e.kind(),
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion
            );
            let _ = e.print();
            return ExitCode::from(if informational { 0 } else { 1 });
        }
    };
    let result = match cli.command {
        Command::Run(a) => commands::run(a),
        Command::AuditCode(a) => commands::audit_code(a),
        Command::VerifyInequalities(a) => commands::verify_inequalities(a),
        Command::Tables(a) => commands::tables(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

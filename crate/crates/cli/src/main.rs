//! Command-line front end for the channel resource toolkit.
//!
//! Exit codes: 0 success, 1 failed checks (reproduce/verify), 2 bad input,
//! 3 solver failure, 4 dimension guard.

mod cmds;
mod table;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "chanres", version, about = "Channel resource measures, rate brackets, and verification sweeps")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Resource monotones of one channel against a free theory.
    Monotone(MonotoneArgs),
    /// One-shot distillation or dilution copy brackets.
    Rates(RatesArgs),
    /// Recompute the registered per-copy constants and compare.
    Reproduce(ReproduceArgs),
    /// Property suites: ordering, collapse, monotonicity.
    Verify(VerifyArgs),
    /// Sample free superchannels and track the robustness across each.
    SuperchannelProbe(ProbeArgs),
}

#[derive(Args)]
struct MonotoneArgs {
    /// Theory token: purity|cc|qc|nu|coh|ent.
    #[arg(long)]
    theory: String,
    /// Comma-separated measure tokens (lr|dmax|dh|dh-choi|dh-unassisted) or "all".
    #[arg(long, default_value = "all")]
    measure: String,
    /// Comma-separated epsilon list, each in [0, 1).
    #[arg(long, default_value = "0")]
    epsilon: String,
    /// Channel file (JSON), mutually exclusive with --target.
    #[arg(long)]
    channel: Option<PathBuf>,
    /// Registered unit token (i2|had|cnot|g2|gplus|gphi) instead of a file.
    #[arg(long)]
    target: Option<String>,
    #[arg(long, default_value_t = 11)]
    seed: u64,
    /// Write CSV here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RatesArgs {
    /// distill or dilute.
    #[arg(long)]
    task: String,
    #[arg(long)]
    theory: String,
    /// Input channel file (JSON).
    #[arg(long)]
    channel: PathBuf,
    /// Unit-channel token to distill into or dilute from; defaults per theory.
    #[arg(long)]
    target: Option<String>,
    #[arg(long, default_value = "0")]
    epsilon: String,
    #[arg(long, default_value_t = 11)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ReproduceArgs {
    /// Restrict to these theories (comma list) or "all".
    #[arg(long, default_value = "all")]
    theory: String,
    /// Largest copy count to recompute (1 or 2).
    #[arg(long, default_value_t = 2)]
    n_max: usize,
    #[arg(long, default_value_t = 1e-5)]
    tol: f64,
    #[arg(long, default_value_t = 11)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Suite token: ordering|collapse|monotonicity.
    #[arg(long)]
    suite: String,
    /// Restrict to these theories (comma list) or "all".
    #[arg(long, default_value = "all")]
    theory: String,
    /// Trials per theory; defaults to 50 (ordering) or 100 (monotonicity).
    #[arg(long)]
    trials: Option<usize>,
    /// Epsilon grid for the ordering suite.
    #[arg(long, default_value = "0,0.05")]
    epsilon: String,
    /// Violation slack; defaults to 1e-6 (1e-5 for collapse).
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long, default_value_t = 11)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ProbeArgs {
    #[arg(long)]
    theory: String,
    #[arg(long)]
    channel: Option<PathBuf>,
    #[arg(long)]
    target: Option<String>,
    #[arg(long, default_value_t = 20)]
    trials: usize,
    #[arg(long, default_value_t = 11)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn exit_code(e: &chanres::Error) -> u8 {
    use chanres::Error;
    match e {
        Error::SolverFailure(_) => 3,
        Error::DimensionMismatch(_) | Error::DimensionGuard(..) | Error::UnsupportedDims(_) => 4,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let run = match cli.cmd {
        Cmd::Monotone(a) => cmds::cmd_monotone(a),
        Cmd::Rates(a) => cmds::cmd_rates(a),
        Cmd::Reproduce(a) => cmds::cmd_reproduce(a),
        Cmd::Verify(a) => cmds::cmd_verify(a),
        Cmd::SuperchannelProbe(a) => cmds::cmd_probe(a),
    };
    match run {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

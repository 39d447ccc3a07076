//! `sepbell`: build separation Bell inequalities, bound them, evaluate
//! quantum values and check chain proofs.
//!
//! Exit codes: 0 success, 1 a checked claim failed, 2 usage or input error.
//! Errors are reported as JSON on stderr.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

#[derive(Parser, Debug)]
#[command(name = "sepbell", version, about = "Separation-based Bell inequalities and their monogamy")]
pub struct Cli {
    /// Worker threads for enumeration and sweeps (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Tolerance for "≥ 0" verdicts.
    #[arg(long, global = true, default_value_t = 1e-7)]
    pub tol: f64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Build inequalities as JSON.
    #[command(subcommand)]
    Ineq(IneqCommand),
    /// Local-realistic or no-signaling minimum of an inequality file.
    #[command(subcommand)]
    Bound(BoundCommand),
    /// Monogamy presets.
    #[command(subcommand)]
    Monogamy(MonogamyCommand),
    /// GHZ quantum values.
    #[command(subcommand)]
    Quantum(QuantumCommand),
    /// Quantum value of the tripartite d-outcome inequality against d, as CSV.
    Figure3 {
        #[arg(long, default_value_t = 2)]
        dmin: usize,
        #[arg(long, default_value_t = 50)]
        dmax: usize,
        /// CSV destination (stdout if omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Chain-proof verification.
    #[command(subcommand)]
    Verify(VerifyCommand),
}

#[derive(Subcommand, Debug)]
pub enum IneqCommand {
    /// Build an expression.
    #[command(subcommand)]
    Build(BuildCommand),
}

#[derive(Subcommand, Debug)]
pub enum BuildCommand {
    /// N-party separation inequality.
    Sep {
        /// Comma-separated party letters, e.g. `A,B,C`.
        #[arg(long, default_value = "A,B,C")]
        parties: String,
        /// Index of the X-term that takes the minus sign.
        #[arg(long)]
        minus: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Tripartite d-outcome quasi-distance inequality.
    Zg {
        #[arg(long)]
        d: usize,
        #[arg(long, default_value = "A,B,C")]
        parties: String,
        /// Reverse the direction of every comparison.
        #[arg(long)]
        swapped: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Monogamy preset.
    Monogamy {
        preset: String,
        /// Outcome count (quasi preset only).
        #[arg(long, default_value_t = 2)]
        d: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
pub struct BoundArgs {
    /// Inequality or monogamy JSON file.
    #[arg(long)]
    pub ineq: PathBuf,
    /// Exact rational arithmetic.
    #[arg(long)]
    pub exact: bool,
    /// Where to write the optimizer behavior (default: next to the input).
    #[arg(long)]
    pub optimizer_out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum BoundCommand {
    /// Minimum over deterministic strategies.
    Lr(BoundArgs),
    /// Minimum over the no-signaling polytope.
    Ns(BoundArgs),
}

#[derive(Subcommand, Debug)]
pub enum MonogamyCommand {
    /// Certify a preset: total minimum and pairwise minima.
    Check {
        preset: String,
        #[arg(long, default_value_t = 2)]
        d: usize,
        #[arg(long)]
        exact: bool,
    },
}

#[derive(Subcommand, Debug)]
pub enum QuantumCommand {
    /// GHZ value of the N-party inequality (`--n`) or of the tripartite
    /// d-outcome inequality (`--d`).
    Eval {
        #[arg(long, conflicts_with = "d", required_unless_present = "d")]
        n: Option<usize>,
        #[arg(long)]
        d: Option<usize>,
    },
}

#[derive(Subcommand, Debug)]
pub enum VerifyCommand {
    /// Verify the built-in proofs, or those in a proof file.
    Chains {
        #[arg(long)]
        file: Option<PathBuf>,
    },
}

/// Failure categories mapped onto exit codes.
#[derive(Debug)]
pub enum Failure {
    /// A claim was checked and does not hold (exit 1).
    Violated(String),
    /// Library error (exit 1 for solver failures, 2 otherwise).
    Lib(sepbell::Error),
    /// Bad file or argument (exit 2).
    Input(String),
}

impl From<sepbell::Error> for Failure {
    fn from(e: sepbell::Error) -> Self {
        Failure::Lib(e)
    }
}

fn report(kind: &str, message: &str) {
    eprintln!("{}", json!({ "error": kind, "message": message }));
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            report("usage", e.to_string().trim());
            return ExitCode::from(2);
        }
    };
    if cli.tol.is_nan() || cli.tol <= 0.0 {
        report("usage", "--tol must be positive");
        return ExitCode::from(2);
    }
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            report("usage", &e.to_string());
            return ExitCode::from(2);
        }
    }
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Violated(message)) => {
            report("violated", &message);
            ExitCode::from(1)
        }
        Err(Failure::Lib(e)) => {
            report(e.kind(), &e.to_string());
            match e {
                sepbell::Error::Lp(_) | sepbell::Error::Certificate(_) => ExitCode::from(1),
                _ => ExitCode::from(2),
            }
        }
        Err(Failure::Input(message)) => {
            report("input", &message);
            ExitCode::from(2)
        }
    }
}

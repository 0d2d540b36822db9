//! `fgsim` command-line front end. Every command prints one JSON document;
//! exit code 0 on success, 2 on parse or validation errors, 3 on resource limits.

use clap::{Parser, Subcommand, ValueEnum};
use fgsim_cli::commands::{self, NormOptions, SampleOptions};
use fgsim_cli::error::CliError;
use fgsim_cli::output;
use fgsim::Mode;
use std::path::PathBuf;
use std::process::ExitCode;

/// Environment variable capping the worker pool size.
const THREADS_ENV: &str = "FGSIM_THREADS";

#[derive(Debug, Parser)]
#[command(name = "fgsim", version, about = "Fermionic Gaussian circuit simulator with non-Gaussian extensions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SampleMode {
    Exact,
    Approx,
    Adaptive,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum NormMode {
    Exact,
    Fast,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Optimal Gaussian decomposition of a catalog gate.
    Decompose {
        #[arg(long)]
        gate: String,
        #[arg(long, allow_negative_numbers = true)]
        theta: Option<f64>,
    },
    /// Per-element cost and total cost of a circuit.
    Extent {
        #[arg(long)]
        circuit: PathBuf,
    },
    /// Draw measurement outcomes.
    Sample {
        #[arg(long)]
        circuit: PathBuf,
        #[arg(long)]
        shots: usize,
        #[arg(long, value_enum, default_value = "exact")]
        mode: SampleMode,
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long, default_value_t = 0.01)]
        pfail: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Measured qubits: `a..b` (half-open), `a..=b`, or a comma list.
        #[arg(long, value_parser = parse_qubits)]
        qubits: Option<QubitList>,
        /// Shots emitted from each drawn trajectory.
        #[arg(long, default_value_t = 1)]
        shots_per_draw: usize,
        #[arg(long, default_value_t = 1 << 20)]
        rank_budget: usize,
    },
    /// Squared norm of the output superposition.
    Norm {
        #[arg(long)]
        circuit: PathBuf,
        #[arg(long, value_enum, default_value = "exact")]
        mode: NormMode,
        #[arg(long, default_value_t = 0.05)]
        eps: f64,
        #[arg(long, default_value_t = 0.01)]
        pfail: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Sparsify to this rank first.
        #[arg(long)]
        k: Option<usize>,
        #[arg(long, default_value_t = 1 << 20)]
        rank_budget: usize,
    },
    /// Trace statistics of sparsified outputs.
    SparsifyReport {
        #[arg(long)]
        circuit: PathBuf,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1 << 20)]
        rank_budget: usize,
    },
}

/// Parsed `--qubits` value.
#[derive(Debug, Clone)]
struct QubitList(Vec<usize>);

fn parse_qubits(s: &str) -> Result<QubitList, String> {
    let num = |t: &str| t.trim().parse::<usize>().map_err(|e| format!("bad qubit '{t}': {e}"));
    let qs = if let Some((a, b)) = s.split_once("..=") {
        (num(a)?..=num(b)?).collect()
    } else if let Some((a, b)) = s.split_once("..") {
        (num(a)?..num(b)?).collect()
    } else {
        s.split(',').map(num).collect::<Result<_, _>>()?
    };
    Ok(QubitList(qs))
}

fn run(cli: Cli) -> Result<serde_json::Value, CliError> {
    match cli.command {
        Command::Decompose { gate, theta } => commands::decompose(&gate, theta),
        Command::Extent { circuit } => commands::extent(&commands::load_circuit(&circuit)?),
        Command::Sample { circuit, shots, mode, delta, eps, pfail, seed, qubits, shots_per_draw, rank_budget } => {
            let program = commands::load_circuit(&circuit)?;
            let mode = match mode {
                SampleMode::Exact => Mode::Exact,
                SampleMode::Approx => Mode::Approx,
                SampleMode::Adaptive => Mode::Adaptive,
            };
            let opts = SampleOptions { shots, mode, delta, epsilon: eps, p_fail: pfail, seed, qubits: qubits.map(|q| q.0), shots_per_draw, rank_budget };
            commands::sample(&program, &opts)
        }
        Command::Norm { circuit, mode, eps, pfail, seed, k, rank_budget } => {
            let program = commands::load_circuit(&circuit)?;
            let opts = NormOptions { fast: matches!(mode, NormMode::Fast), epsilon: eps, p_fail: pfail, seed, k, rank_budget };
            commands::norm(&program, &opts)
        }
        Command::SparsifyReport { circuit, k, trials, seed, rank_budget } => {
            commands::sparsify_report(&commands::load_circuit(&circuit)?, k, trials, seed, rank_budget)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let err = CliError::Validation(e.kind().to_string() + ": " + e.to_string().lines().next().unwrap_or_default());
            println!("{}", output::to_string(&err.to_json()));
            return ExitCode::from(2);
        }
    };
    if let Ok(v) = std::env::var(THREADS_ENV) {
        match v.parse::<usize>() {
            Ok(t) if t > 0 => {
                fgsim::exec::configure_threads(t);
            }
            _ => {
                let err = CliError::Validation(format!("{THREADS_ENV} must be a positive integer, got '{v}'"));
                println!("{}", output::to_string(&err.to_json()));
                return ExitCode::from(2);
            }
        }
    }
    match run(cli) {
        Ok(v) => {
            println!("{}", output::to_string(&v));
            ExitCode::SUCCESS
        }
        Err(e) => {
            println!("{}", output::to_string(&e.to_json()));
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

/// Simulator and analysis toolkit for multimode squeezed light from a
/// synchronously pumped optical parametric oscillator.
#[derive(Parser)]
#[command(name = "qcomb", version, max_term_width = 100)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the model and write supermodes, eigenvalues, and the band state
    Simulate(SimulateArgs),
    /// Scan every bipartition of a state file for entanglement witnesses
    Witness(WitnessArgs),
    /// Assemble a covariance state from a homodyne trace bundle
    Ingest(BundleArgs),
    /// Extract squeezed modes from a trace bundle with Monte Carlo error bars
    Modes(AnalysisArgs),
    /// Full analysis of a trace bundle: state, witnesses, modes, plot data
    Report(AnalysisArgs),
}

#[derive(Args)]
struct SimulateArgs {
    /// Run configuration (JSON)
    #[arg(long)]
    config: PathBuf,
    /// Output directory (default: config `out_dir`, else `out`)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct WitnessArgs {
    /// Covariance state file written by `simulate` or `ingest`
    state: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BundleArgs {
    #[arg(long)]
    config: PathBuf,
    /// Long-format scan table: shape_id, band_i, band_j, phase, power_db
    #[arg(long)]
    traces: PathBuf,
    /// Relative band powers (JSON)
    #[arg(long)]
    powers: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct AnalysisArgs {
    #[command(flatten)]
    bundle: BundleArgs,
    /// Override the config seed
    #[arg(long)]
    seed: Option<u64>,
    /// Override the config Monte Carlo sample count
    #[arg(long)]
    mc_samples: Option<usize>,
}

/// Exit codes: 2 configuration, 3 data, 4 physicality refusal.
pub struct CliError {
    code: u8,
    message: String,
}

impl CliError {
    pub(crate) fn new(code: u8, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
        }
    }

    /// Classifies a library error by what went wrong, not where.
    pub(crate) fn from_lib(e: qcomb::Error) -> Self {
        use qcomb::Error::*;
        let code = match &e {
            Model(_) | AboveThreshold(_) => 2,
            Data(_) | Io(_) | Csv(_) | Json(_) => 3,
            Unphysical { .. } | NotPositiveDefinite(_) => 4,
        };
        Self::new(code, e.to_string())
    }

    /// Any failure while reading the run configuration is a config error.
    pub(crate) fn config(path: &std::path::Path, e: qcomb::Error) -> Self {
        Self::new(2, format!("config {}: {e}", path.display()))
    }
}

impl From<qcomb::Error> for CliError {
    fn from(e: qcomb::Error) -> Self {
        Self::from_lib(e)
    }
}

fn init_workers() {
    if let Ok(v) = std::env::var("QCOMB_WORKERS") {
        if let Ok(n) = v.parse::<usize>() {
            if n > 0 {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
        }
    }
}

fn main() -> ExitCode {
    init_workers();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate(a) => commands::simulate::run(&a.config, a.out.as_deref()),
        Command::Witness(a) => commands::witness::run(&a.state, a.out.as_deref()),
        Command::Ingest(a) => {
            commands::ingest::run(&a.config, &a.traces, &a.powers, a.out.as_deref())
        }
        Command::Modes(a) => commands::modes::run(&a),
        Command::Report(a) => commands::report::run(&a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}

mod commands;
mod config;
mod numfmt;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};

/// Truncated Fock-space channels: fidelities, invariant hulls, fixed points
/// and encoding search.
#[derive(Debug, Parser)]
#[command(
    name = "subchan",
    version,
    after_help = "Any long flag may also be set in a flat key=value file passed as `--config PATH`; \
                  flags given on the command line take precedence."
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Average fidelity of an encoded qubit.
    #[command(args_override_self = true)]
    Fidelity {
        #[command(flatten)]
        channel: ChannelArgs,
        #[command(flatten)]
        encoding: EncodingArgs,
        /// Also run the quadrature oracle and report the gap.
        #[arg(long)]
        quadrature: bool,
        /// Quadrature nodes per angle.
        #[arg(long, default_value_t = 16)]
        nodes: usize,
    },
    /// Invariant-hull and unitality verdicts for a subspace.
    #[command(args_override_self = true)]
    HullCheck {
        #[command(flatten)]
        channel: ChannelArgs,
        #[command(flatten)]
        encoding: EncodingArgs,
    },
    /// Basis of the operators left fixed by the channel.
    #[command(args_override_self = true)]
    FixedPoints {
        #[command(flatten)]
        channel: ChannelArgs,
        /// Singular-value threshold.
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
    },
    /// Search for the best qubit encoding on a set of levels.
    #[command(args_override_self = true)]
    Optimize {
        #[command(flatten)]
        channel: ChannelArgs,
        /// Fock levels available to the encoding.
        #[arg(long, value_delimiter = ',', num_args = 1.., required = true)]
        levels: Vec<usize>,
        #[arg(long, default_value_t = 20)]
        restarts: usize,
        #[arg(long, env = "SUBCHAN_SEED", default_value_t = 0)]
        seed: u64,
        /// Also search relative phases (exploratory).
        #[arg(long)]
        complex_phases: bool,
    },
    /// Fidelity over a grid of damping parameters.
    #[command(args_override_self = true)]
    Sweep {
        #[command(flatten)]
        channel: ChannelArgs,
        #[command(flatten)]
        encoding: EncodingArgs,
        #[arg(long, default_value_t = 0.0)]
        eta_start: f64,
        #[arg(long, default_value_t = 1.0)]
        eta_end: f64,
        #[arg(long, default_value_t = 11)]
        steps: usize,
        /// Quadrature nodes per angle.
        #[arg(long, default_value_t = 16)]
        nodes: usize,
        /// Write CSV here instead of printing a table.
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
    /// Trace preservation, hermiticity and sampled positivity checks.
    #[command(args_override_self = true)]
    Verify {
        #[command(flatten)]
        channel: ChannelArgs,
        /// Levels covered by the checks (defaults to the full truncation).
        #[arg(long)]
        block: Option<usize>,
        #[arg(long, default_value_t = 0x5eed_c0de)]
        seed: u64,
        #[arg(long, default_value_t = 20)]
        samples: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ChannelKind {
    /// Phase damping.
    Pd,
    /// Amplitude damping.
    Ad,
    /// Depolarizing.
    Dep,
    /// Kraus operators read from --channel-file.
    File,
}

#[derive(Debug, Clone, Args)]
pub struct ChannelArgs {
    #[arg(long, value_enum)]
    pub channel: ChannelKind,
    /// Damping parameter.
    #[arg(long)]
    pub eta: Option<f64>,
    /// Depolarizing weight on the input.
    #[arg(long)]
    pub p: Option<f64>,
    /// Truncation (default 32).
    #[arg(long)]
    pub dim: Option<usize>,
    #[arg(long, value_name = "PATH")]
    pub channel_file: Option<PathBuf>,
    /// Number of phase-damping Kraus terms (default: until complete).
    #[arg(long)]
    pub kraus_terms: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct EncodingArgs {
    /// Fock levels spanning the subspace, e.g. `0,1`.
    #[arg(long, value_delimiter = ',', num_args = 1.., conflicts_with = "encoding_file")]
    pub levels: Option<Vec<usize>>,
    /// Two rows of Fock coefficients.
    #[arg(long, value_name = "PATH")]
    pub encoding_file: Option<PathBuf>,
}

pub const DEFAULT_DIM: usize = 32;

/// Why a command stopped.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Domain(String),
}

impl From<subchan::Error> for Failure {
    fn from(e: subchan::Error) -> Self {
        Failure::Domain(e.to_string())
    }
}

fn main() -> ExitCode {
    let raw: Vec<String> = std::env::args().collect();
    let argv = match config::expand(raw, &Cli::command()) {
        Ok(argv) => argv,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            return ExitCode::from(2);
        }
        Err(Failure::Domain(msg)) => {
            eprintln!("error: {msg}");
            return ExitCode::from(1);
        }
    };
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let mut out = std::io::stdout().lock();
    match commands::run(cli.command, &mut out) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            eprintln!("run `subchan --help` for usage");
            ExitCode::from(2)
        }
        Err(Failure::Domain(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

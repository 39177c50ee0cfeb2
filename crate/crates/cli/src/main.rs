//! `agesched` — analyze, synthesize, simulate, and benchmark cyclic
//! transmission schedules for multi-source status-update systems.
//!
//! Five subcommands: `analyze` evaluates a pattern in closed form,
//! `synthesize` builds one (square-root-law peak-age pipeline, iterated
//! mean-age pipeline, round-robin, or insertion search), `simulate` replays
//! the slot process and scores the closed forms, `benchmark` emits CSV
//! sweeps over canned or custom experiment families, and `plotdata`
//! reshapes benchmark CSV into tidy plotting triples.
//!
//! Exit codes: 0 on success, 2 on user/config errors, 3 when an internal
//! invariant breaks (a bug, not an input problem).

mod bench;
mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

/// Error with the process exit code it deserves.
#[derive(Debug)]
pub struct CliError {
    pub message: String,
    pub internal: bool,
}

impl CliError {
    pub fn user(message: String) -> Self {
        CliError { message, internal: false }
    }
}

impl From<agesched_core::Error> for CliError {
    fn from(e: agesched_core::Error) -> Self {
        CliError {
            internal: matches!(e, agesched_core::Error::Internal { .. }),
            message: e.to_string(),
        }
    }
}

#[derive(Parser)]
#[command(
    name = "agesched",
    version,
    about = "Cyclic schedule analysis and synthesis for status-update freshness"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a cyclic pattern's per-source and system ages in closed form
    Analyze {
        /// Experiment config (JSON) with the system block
        #[arg(long)]
        config: PathBuf,
        /// Pattern inline, comma-separated 1-based indices (e.g. 1,2,1,3)
        #[arg(long)]
        pattern: Option<String>,
        /// Pattern from a one-line text file instead
        #[arg(long, conflicts_with = "pattern")]
        pattern_file: Option<PathBuf>,
        /// Write the machine-readable record here
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Construct a pattern for the configured system
    Synthesize {
        #[arg(long)]
        config: PathBuf,
        /// One of: spms, sams, rr, is
        #[arg(long)]
        method: Option<String>,
        /// Oversampling parameter for spms
        #[arg(long)]
        epsilon: Option<f64>,
        /// Oversampling grid for sams: start:step:end or a comma list
        #[arg(long)]
        epsilons: Option<String>,
        /// Fixed-point rounds for sams
        #[arg(long)]
        iters: Option<usize>,
        /// Largest pattern size for is
        #[arg(long)]
        max_size: Option<usize>,
        /// Stop is as soon as a round cannot improve
        #[arg(long)]
        stop_early: bool,
        /// Write the pattern line here
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Monte Carlo run with agreement scoring against the closed forms
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Cyclic schedule to simulate
        #[arg(long)]
        pattern: Option<String>,
        #[arg(long, conflicts_with = "pattern")]
        pattern_file: Option<PathBuf>,
        /// Probabilistic schedule instead: comma-separated probabilities
        #[arg(long, conflicts_with_all = ["pattern", "pattern_file"])]
        probabilities: Option<String>,
        #[arg(long)]
        seed: Option<u64>,
        /// Successful deliveries per source before stopping
        #[arg(long)]
        target: Option<u64>,
        /// Successful deliveries per source to discard first
        #[arg(long)]
        warmup: Option<u64>,
        /// Dump recorded peak-age samples to CSV
        #[arg(long)]
        dump_paoi: Option<PathBuf>,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Run an experiment family and emit CSV rows per (sweep point, policy)
    Benchmark {
        /// One of: fig2, fig3, fig4, fig5
        #[arg(long)]
        preset: Option<String>,
        /// Config with a custom benchmark sweep block
        #[arg(long)]
        config: Option<PathBuf>,
        /// Output CSV path (stdout when omitted)
        #[arg(long)]
        out: Option<PathBuf>,
        /// Base seed for randomized presets
        #[arg(long)]
        seed: Option<u64>,
        /// Instance count for randomized presets
        #[arg(long)]
        instances: Option<usize>,
        /// Insertion-search budget: sams3 (match its pattern size) or fixed:N
        #[arg(long)]
        is_budget: Option<String>,
        /// Force insertion search on presets that skip it by default
        #[arg(long)]
        include_is: bool,
    },
    /// Reshape a benchmark CSV into tidy (x, series, y) rows
    Plotdata {
        /// Benchmark CSV to reshape
        #[arg(long)]
        input: PathBuf,
        /// Which metric becomes y: aoi or paoi
        #[arg(long, default_value = "aoi")]
        metric: String,
        /// Output CSV path (stdout when omitted)
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Analyze { config, pattern, pattern_file, json } => {
            commands::analyze(&config, pattern, pattern_file, json)
        }
        Command::Synthesize {
            config,
            method,
            epsilon,
            epsilons,
            iters,
            max_size,
            stop_early,
            out,
            json,
        } => commands::synthesize(
            &config,
            commands::SynthesizeArgs {
                method,
                epsilon,
                epsilons,
                iterations: iters,
                max_size,
                stop_early,
            },
            out,
            json,
        ),
        Command::Simulate {
            config,
            pattern,
            pattern_file,
            probabilities,
            seed,
            target,
            warmup,
            dump_paoi,
            json,
        } => commands::simulate(
            &config,
            commands::SimulateArgs { pattern, pattern_file, probabilities, seed, target, warmup },
            dump_paoi,
            json,
        ),
        Command::Benchmark { preset, config, out, seed, instances, is_budget, include_is } => {
            bench::benchmark(preset, config, out, seed, instances, is_budget, include_is)
        }
        Command::Plotdata { input, metric, out } => bench::plotdata(&input, &metric, out),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(if e.internal { 3 } else { 2 })
        }
    }
}

//! `orderless` command-line tool.
//!
//! Exit codes: 0 success, 1 usage error, 2 invalid or unreadable data,
//! 3 runtime failure. Every random choice descends from a `--seed` flag or
//! the config's `seed` key.

mod commands;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "orderless", version, about = "DFS orderings, trajectory sets and orderless-regularized sequence models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Config file plus overrides. Flags win over the file; the file wins over
/// built-in defaults.
#[derive(Args, Debug, Clone, Default)]
pub struct ConfigArgs {
    /// File of `key = value` lines
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Override one config key; repeatable
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
    /// Master seed, overriding the config's `seed`
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleMode {
    /// Every valid DFS ordering
    Enumerate,
    /// Valid orderings ending at `--end`
    EndAt,
    /// Structure invariance gap of `--model`
    InvarianceGap,
}

#[derive(Subcommand)]
enum Command {
    /// Write random connected graphs; trees when --extra-edges is 0
    GenGraphs {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        extra_edges: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value = "g")]
        prefix: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Precompute common-end trajectory sets for a graph file
    Trajectories {
        #[arg(long = "in")]
        input: PathBuf,
        /// Trajectories per graph
        #[arg(long, default_value_t = 10)]
        count: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Keep trajectory records with at least --min trajectories
    Filter {
        /// Graph file the records refer to
        #[arg(long)]
        graphs: PathBuf,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value_t = 10)]
        min: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train a model; --data replaces the generated training split
    Train {
        #[command(flatten)]
        config: ConfigArgs,
        #[arg(long)]
        data: Option<PathBuf>,
        /// Stored trajectory file for full-graph OLR pairs
        #[arg(long)]
        trajectories: Option<PathBuf>,
        #[arg(long)]
        out_model: PathBuf,
        /// Training log: resolved config, then one line per epoch
        #[arg(long)]
        log: Option<PathBuf>,
    },
    /// Evaluate a checkpoint; --data replaces the generated test split
    Eval {
        #[command(flatten)]
        config: ConfigArgs,
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        data: Option<PathBuf>,
        /// Graphs whose strings count as seen for novelty (language models)
        #[arg(long)]
        reference: Option<PathBuf>,
        #[arg(long)]
        metrics_out: Option<PathBuf>,
    },
    /// Sample sequences from a language model checkpoint
    Generate {
        #[command(flatten)]
        config: ConfigArgs,
        #[arg(long)]
        model: PathBuf,
        /// Number of samples, overriding the config's `sample_count`
        #[arg(long)]
        count: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exhaustive checks on small graphs
    Oracle {
        #[command(flatten)]
        config: ConfigArgs,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, value_enum)]
        mode: OracleMode,
        /// End vertex for end-at
        #[arg(long)]
        end: Option<usize>,
        /// Checkpoint for invariance-gap
        #[arg(long)]
        model: Option<PathBuf>,
        /// Node bound, overriding the config's `oracle_max_nodes`
        #[arg(long)]
        bound: Option<usize>,
    },
    /// Wiener index of every graph in a file
    Wiener {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Size and edge-connectivity statistics of a graph file
    Stats {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        metrics_out: Option<PathBuf>,
    },
}

fn run(command: Command) -> Result<(), error::Failure> {
    match command {
        Command::GenGraphs {
            n,
            count,
            extra_edges,
            seed,
            prefix,
            out,
        } => commands::gen_graphs(n, count, extra_edges, seed, &prefix, &out),
        Command::Trajectories { input, count, seed, out } => commands::trajectories(&input, count, seed, &out),
        Command::Filter { graphs, input, min, out } => commands::filter(&graphs, &input, min, &out),
        Command::Train {
            config,
            data,
            trajectories,
            out_model,
            log,
        } => commands::train(&config, data.as_deref(), trajectories.as_deref(), &out_model, log.as_deref()),
        Command::Eval {
            config,
            model,
            data,
            reference,
            metrics_out,
        } => commands::eval(&config, &model, data.as_deref(), reference.as_deref(), metrics_out.as_deref()),
        Command::Generate { config, model, count, out } => commands::generate(&config, &model, count, out.as_deref()),
        Command::Oracle {
            config,
            input,
            mode,
            end,
            model,
            bound,
        } => commands::oracle(&config, &input, mode, end, model.as_deref(), bound),
        Command::Wiener { input, out } => commands::wiener(&input, out.as_deref()),
        Command::Stats { input, metrics_out } => commands::stats(&input, metrics_out.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {failure}");
            ExitCode::from(failure.code())
        }
    }
}

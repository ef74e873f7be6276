//! Argument parsing and command dispatch.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::commands;
use crate::config::{load_config, Overrides};
use crate::error::CliError;

#[derive(Parser, Debug)]
#[command(
    name = "eprune",
    version,
    about = "Energy-guided evolutionary pruning of dense classifiers"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Train with the evolutionary mask search, then fine-tune.
    Train(CommonArgs),
    /// Dense training + unit-magnitude pruning at a target rate + fine-tune.
    Baseline {
        #[command(flatten)]
        common: CommonArgs,
        /// Target kept-parameter ratio in (0, 1].
        #[arg(long)]
        rate: Option<f64>,
    },
    /// Run the optimizer benchmark against the brute-force oracle.
    Bench(CommonArgs),
    /// Evaluate a checkpoint + mask pair (full and pruned rows).
    Eval {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long)]
        mask: PathBuf,
    },
}

impl Command {
    fn common(&self) -> &CommonArgs {
        match self {
            Command::Train(common) | Command::Bench(common) => common,
            Command::Baseline { common, .. } | Command::Eval { common, .. } => common,
        }
    }
}

#[derive(Args, Debug)]
struct CommonArgs {
    /// JSON run configuration; flags override file values.
    #[arg(long)]
    config: PathBuf,
    /// Master seed override.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads for population-energy evaluation.
    #[arg(long, default_value_t = 1)]
    workers: usize,
    /// Output directory override.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Epoch-count override.
    #[arg(long)]
    epochs: Option<u32>,
    /// Re-score parents on the current batch before selection.
    #[arg(long)]
    reevaluate_parents: bool,
}

/// Runs the CLI and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(err) => {
            let is_usage = err.use_stderr();
            let _ = err.print();
            return if is_usage { 2 } else { 0 };
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(err) => {
            eprintln!("{}", err.to_json());
            err.exit_code()
        }
    }
}

fn execute(cli: Cli) -> Result<(), CliError> {
    let common = cli.command.common();
    let mut config = load_config(&common.config)?;
    let rate = match &cli.command {
        Command::Baseline { rate, .. } => *rate,
        _ => None,
    };
    config.apply_overrides(&Overrides {
        seed: common.seed,
        epochs: common.epochs,
        out: common.out.clone(),
        rate,
        reevaluate_parents: common.reevaluate_parents,
    });

    let workers = common.workers.max(1);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| CliError::Other(format!("building worker pool: {e}")))?;
    pool.install(|| match &cli.command {
        Command::Train(_) => commands::train(&config),
        Command::Baseline { .. } => commands::baseline(&config),
        Command::Bench(_) => commands::bench(&config),
        Command::Eval {
            checkpoint, mask, ..
        } => commands::eval(&config, checkpoint, mask),
    })
}

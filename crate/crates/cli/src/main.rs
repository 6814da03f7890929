//! `cascade-scope`: file-driven pipeline from repost logs to virality
//! prediction.

mod config;
mod manifest;
mod stages;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use config::{Overrides, PipelineConfig};

#[derive(Parser)]
#[command(name = "cascade-scope", version, about = "Cascade reconstruction, structural-diversity features and virality prediction")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    global: GlobalArgs,
}

#[derive(Args)]
struct GlobalArgs {
    /// JSON pipeline config; defaults apply when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed for every random stream.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Cap on worker threads.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[arg(long = "th-train", global = true)]
    th_train: Option<usize>,
    #[arg(long = "th-test", global = true)]
    th_test: Option<usize>,
    /// Recent-exposure window in minutes.
    #[arg(long, global = true)]
    lambda: Option<f64>,
    /// Community detection method (louvain, labelprop, file).
    #[arg(long, global = true)]
    method: Option<String>,
    /// Feature group for featurize, train and sweep.
    #[arg(long, global = true)]
    group: Option<String>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Build the social graph from the repost log.
    Ingest,
    /// Partition the graph into communities.
    Communities,
    /// Reconstruct cascades from the repost log.
    Cascades,
    /// Extract feature tables.
    Featurize,
    /// Compare viral and non-viral cascades stage by stage.
    Study,
    /// Cross-validate a classifier and fit the final model.
    Train,
    /// Cross-validate over a range of training thresholds.
    Sweep,
    /// Generate a synthetic network and repost log.
    Synth,
    /// Network properties of the ingested graph.
    Stats,
}

fn run(cli: Cli) -> Result<()> {
    let g = cli.global;
    if let Some(n) = g.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build_global()
            .context("cannot configure the thread pool")?;
    }
    let overrides = Overrides {
        seed: g.seed,
        th_train: g.th_train,
        th_test: g.th_test,
        lambda: g.lambda,
        method: g.method,
        group: g.group.clone(),
        out_dir: g.out,
    };
    let cfg = PipelineConfig::load(g.config.as_deref())?.effective(&overrides)?;
    match cli.command {
        Command::Ingest => stages::ingest(&cfg),
        Command::Communities => stages::communities(&cfg),
        Command::Cascades => stages::cascades(&cfg),
        Command::Featurize => stages::featurize(&cfg, g.group.as_deref()),
        Command::Study => stages::study(&cfg),
        Command::Train => stages::train(&cfg),
        Command::Sweep => stages::sweep(&cfg),
        Command::Synth => stages::synth(&cfg),
        Command::Stats => stages::stats(&cfg),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

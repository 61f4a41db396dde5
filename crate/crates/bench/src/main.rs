mod config;
mod metrics;
mod pipeline;
mod results;

use std::path::PathBuf;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};

use config::ExperimentConfig;
use pipeline::{Command, Options, Runner};

/// Sparse matrix DEIM reduced-order-model experiments.
#[derive(Parser)]
#[command(name = "smdeim-rom", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run the full-order model and store its snapshots.
    Simulate(CommonArgs),
    /// Build the bases, interpolants and reduced models.
    Offline(CommonArgs),
    /// Run stored reduced models and report their metrics.
    Online(CommonArgs),
    /// Offline and online in one pass over the experiment grid.
    Sweep(CommonArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Experiment configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides the `out` key.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Single evaluation seed; overrides the `seeds` key.
    #[arg(long)]
    seed: Option<u64>,
    /// Reduced models processed in parallel.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    let (command, args) = match cli.command {
        Cmd::Simulate(a) => (Command::Simulate, a),
        Cmd::Offline(a) => (Command::Offline, a),
        Cmd::Online(a) => (Command::Online, a),
        Cmd::Sweep(a) => (Command::Sweep, a),
    };
    let mut cfg = ExperimentConfig::load(&args.config)?;
    if let Some(seed) = args.seed {
        cfg.seeds = vec![seed];
    }
    let opts = Options {
        out: args.out.unwrap_or_else(|| cfg.out.clone()),
        jobs: args.jobs,
    };
    let summary = Runner::new(&cfg, &opts).run(command)?;
    eprintln!(
        "{}: {} rows written, {} skipped, {} failed; results in {}",
        command.name(),
        summary.written,
        summary.skipped,
        summary.failed,
        opts.out.join("results.csv").display()
    );
    Ok(())
}

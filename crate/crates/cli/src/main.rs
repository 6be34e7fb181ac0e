mod artifacts;
mod commands;
mod config;
mod svg;

use std::path::PathBuf;

use clap::{Parser, Subcommand};
use omiclust_core::{Error, Result};

use config::{Overrides, PipelineConfig};

/// Multi-view expression clustering pipeline: ingest, preprocess, cluster,
/// consensus, model selection, and figure rendering.
#[derive(Parser, Debug)]
#[command(name = "omiclust", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    overrides: Overrides,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Merge input views over shared samples and select top-variance features.
    Preprocess,
    /// Run one base algorithm at fixed k and score it with silhouettes.
    Cluster,
    /// Resampled consensus clustering at fixed k.
    Consensus,
    /// Search a K range with consensus CDF delta-area selection.
    SelectK,
    /// Render SVG figures and a text summary from a finished run directory.
    Report {
        /// Run directory; defaults to the configured output directory.
        dir: Option<PathBuf>,
    },
    /// Generate planted-partition synthetic views in the ingestion format.
    Synth,
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) => 1,
        Error::Data(_) | Error::Parse { .. } | Error::Io(_) => 2,
        Error::Numeric(_) => 3,
    }
}

fn run(cli: &Cli) -> Result<()> {
    let cfg = PipelineConfig::resolve(&cli.overrides)?;
    if cfg.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.threads)
            .build_global()
            .map_err(|e| Error::Config(format!("cannot configure {} threads: {e}", cfg.threads)))?;
    }
    match &cli.command {
        Command::Preprocess => commands::cmd_preprocess(&cfg),
        Command::Cluster => commands::cmd_cluster(&cfg),
        Command::Consensus => commands::cmd_consensus(&cfg),
        Command::SelectK => commands::cmd_select_k(&cfg),
        Command::Report { dir } => commands::cmd_report(&cfg, dir.as_deref()),
        Command::Synth => commands::cmd_synth(&cfg),
    }
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                e.exit();
            }
            eprintln!("{e}");
            std::process::exit(1);
        }
    };
    if let Err(e) = run(&cli) {
        eprintln!("error: {e}");
        std::process::exit(exit_code(&e));
    }
}

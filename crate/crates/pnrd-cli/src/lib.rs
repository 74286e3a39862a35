//! Command-line front end for the detector simulation: experiment configs
//! in, CSV artifacts out.
//!
//! Two subcommands:
//!
//! * `pnrd run <config.toml>` — execute the config's task, write its CSV
//!   into `--out` (default: the current directory), and print a one-line
//!   summary to stdout.
//! * `pnrd preset list` — print the built-in component sets as CSV.
//!
//! Identical configs produce byte-identical CSV files: every computation
//! is deterministic, and the sampling task requires an explicit seed. The
//! config grammar lives in [`config`]; task semantics in [`tasks`].

#![forbid(unsafe_code)]

pub mod config;
pub mod tasks;

use std::fmt::Write as _;
use std::path::PathBuf;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use pnrd::{run_validation, ValidationConfig};

/// Detector-simulation workbench: experiment configs in, CSV out.
#[derive(Debug, Parser)]
#[command(name = "pnrd", version, about)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the experiment described by a TOML config file.
    Run(RunArgs),
    /// Inspect the built-in component presets.
    #[command(subcommand)]
    Preset(PresetCommand),
}

#[derive(Debug, Subcommand)]
pub enum PresetCommand {
    /// Print every preset as CSV.
    List,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Path to the experiment config.
    pub config: PathBuf,
    /// Directory artifacts are written into (default: current directory).
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Run the randomized validation suite first; fail on any disagreement.
    #[arg(long)]
    pub validate: bool,
    /// Override the config seed for sampling tasks.
    #[arg(long, value_name = "U64")]
    pub seed: Option<u64>,
    /// Cap the worker-thread pool (results do not depend on it).
    #[arg(long, value_name = "K")]
    pub threads: Option<usize>,
}

/// Executes a parsed command line.
pub fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Preset(PresetCommand::List) => {
            print!("{}", preset_table());
            Ok(())
        }
        Command::Run(args) => run(&args),
    }
}

/// The built-in presets as CSV, one row per component set.
pub fn preset_table() -> String {
    let mut out = String::from(
        "name,coupler_loss_db,fiber_loss_db,switch_loss_db,detector_efficiency,\
         dark_count,metadata\n",
    );
    for preset in &config::BUILTIN_PRESETS {
        let p = preset.params;
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            preset.name,
            p.coupler_loss_db,
            p.fiber_loss_db,
            p.switch_loss_db,
            p.detector_efficiency,
            p.dark_count,
            preset.metadata
        )
        .unwrap();
    }
    out
}

fn run(args: &RunArgs) -> Result<()> {
    if let Some(threads) = args.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| anyhow!("--threads {threads}: {e}"))?;
    }
    let text = std::fs::read_to_string(&args.config)
        .with_context(|| format!("reading {}", args.config.display()))?;
    let config =
        config::from_toml(&text).with_context(|| format!("parsing {}", args.config.display()))?;
    if args.validate {
        let suite = ValidationConfig {
            seed: args.seed.unwrap_or(ValidationConfig::default().seed),
            ..ValidationConfig::default()
        };
        let report = run_validation(&suite);
        for failure in &report.failures {
            eprintln!("validation failure: {failure}");
        }
        println!("validate: {}", report.summary());
        if !report.passed() {
            bail!("validation suite failed");
        }
    }
    let options = tasks::RunOptions {
        out_dir: args.out.clone().unwrap_or_else(|| PathBuf::from(".")),
        seed_override: args.seed,
    };
    let summary = tasks::run_task(&config, &options)?;
    println!("{summary}");
    Ok(())
}

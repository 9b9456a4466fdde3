//! Config-driven driver for `pinning-core`: every subcommand reads one JSON
//! config and writes hashed CSV/JSON files into one output directory.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod output;
mod plot;

use std::path::PathBuf;

use clap::Parser;
use serde_json::json;

pub use commands::{Command, RunError};
use config::{parse_config, parse_config_str, Format, RunConfig};
use output::OutputDir;

#[derive(Debug, Parser)]
#[command(name = "pinning", version, about = "Polariton pinning toolkit")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// JSON run configuration; the baseline is used when omitted.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory (overrides output.directory).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Tabular output format (overrides output.format).
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Reserved; no stochastic paths use it yet.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
}

/// Loads the config and applies command-line overrides.
pub fn resolve(cli: &Cli) -> Result<RunConfig, RunError> {
    let mut cfg = match &cli.config {
        Some(path) => parse_config(path)?,
        None => {
            let mut cfg = parse_config_str("{}")?;
            cfg.provenance.insert(0, "no --config given; baseline configuration".into());
            cfg
        }
    };
    if let Some(dir) = &cli.out {
        cfg.output.directory = dir.clone();
    }
    if let Some(format) = cli.format {
        cfg.output.format = format;
    }
    if cli.seed.is_some() {
        cfg.provenance.push("--seed is reserved and has no effect".into());
    }
    Ok(cfg)
}

/// Runs the parsed command line and returns the process exit code.
pub fn run(cli: &Cli) -> u8 {
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            let msg = json!({"level": "error", "class": e.class(), "command": cli.command.name(), "message": e.to_string()});
            eprintln!("{msg}");
            e.exit_code()
        }
    }
}

fn execute(cli: &Cli) -> Result<(), RunError> {
    let cfg = resolve(cli)?;
    let hash = cfg.hash();
    for line in &cfg.provenance {
        eprintln!("{}", json!({"level": "note", "message": line}));
    }
    let mut out = OutputDir::create(&cfg.output.directory, hash)?;
    let mut notes = Vec::new();
    let result = commands::dispatch(cli.command, &cfg, &mut out, &mut notes);
    for line in &notes {
        eprintln!("{}", json!({"level": "note", "message": line}));
    }
    let provenance = json!({
        "command": cli.command.name(),
        "config": cfg.hashed_value(),
        "defaults_applied": cfg.provenance,
        "derived": notes,
    });
    out.write_json(&format!("{}_provenance.json", cli.command.name()), "provenance", &provenance)?;
    result
}

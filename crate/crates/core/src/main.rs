// Copyright 2026 The confine-sim Authors
// SPDX-License-Identifier: Apache-2.0

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use confine_sim::commands::{cmd_ensemble, cmd_ingest, cmd_map, cmd_run, cmd_semiclassical};
use confine_sim::config::RunConfig;
use confine_sim::par::with_threads;
use confine_sim::{Error, Result};

const THREADS_ENV: &str = "CONFINE_SIM_THREADS";

#[derive(Parser)]
#[command(name = "confine-sim", version, about = "Quench dynamics of a driven Rydberg chain")]
struct Cli {
    /// JSON run configuration; defaults apply to every missing key.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides execution.seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Overrides output.dir.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads; falls back to $CONFINE_SIM_THREADS, then execution.threads.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the Ising → Rydberg parameter report.
    Map,
    /// Coherent evolution; writes correlations and the correlation front.
    Run,
    /// Noise-ensemble mean and standard deviation of the correlations.
    Ensemble,
    /// Semiclassical mean meson separation at the sample times.
    Semiclassical,
    /// Correlations estimated from a shot file.
    Ingest {
        /// CSV of `t_us,bitstring` rows.
        shots: PathBuf,
    },
}

fn load(cli: &Cli) -> Result<RunConfig> {
    let mut config = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
                path: path.clone(),
                source: e,
            })?;
            RunConfig::from_json(&text)?
        }
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        config.execution.seed = seed;
    }
    if let Some(out) = &cli.out {
        config.output.dir = out.clone();
    }
    config.validate()?;
    Ok(config)
}

fn threads(cli: &Cli, config: &RunConfig) -> Result<Option<usize>> {
    if cli.threads.is_some() {
        return Ok(cli.threads);
    }
    match std::env::var(THREADS_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| Error::Config(format!("{THREADS_ENV} must be a positive integer, got `{v}`"))),
        Err(_) => Ok(config.execution.threads),
    }
}

fn dispatch(cli: &Cli) -> Result<()> {
    let config = load(cli)?;
    let threads = threads(cli, &config)?;
    with_threads(threads, || match &cli.command {
        Command::Map => {
            print!("{}", cmd_map(&config)?);
            Ok(())
        }
        Command::Run => cmd_run(&config).map(|_| ()),
        Command::Ensemble => cmd_ensemble(&config).map(|_| ()),
        Command::Semiclassical => cmd_semiclassical(&config).map(|_| ()),
        Command::Ingest { shots } => cmd_ingest(&config, shots).map(|_| ()),
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

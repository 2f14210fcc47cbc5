//! Command-line driver for the MEMS plate model.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::Status;
use config::ConfigError;
use output::Output;

#[derive(Parser, Debug)]
#[command(name = "memsplate", version, about = "Electrostatic MEMS plate solver")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// TOML run configuration; defaults apply when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (overrides `out` in the configuration).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Single-threaded execution for reproducible output.
    #[arg(long, global = true)]
    serial: bool,
    /// Seed for the randomized probe families.
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// Potential, traces and energy for the configured deflection.
    Solve,
    /// Force density and its summands.
    Force,
    /// Mechanical, electrostatic and total energy.
    Energy,
    /// Minimize the total energy from the configured deflection.
    Minimize,
    /// Run the selected verification probes.
    Verify,
    /// Minimize along the configured voltage list.
    Sweep,
}

fn run(cli: &Cli) -> anyhow::Result<Status> {
    let resolved = config::load(cli.config.as_deref(), cli.seed, cli.out.as_deref())?;
    let mut out = Output::new(&resolved.out_dir(), &resolved.hash)?;
    let status = match cli.command {
        Command::Solve => commands::solve(&resolved, &mut out)?,
        Command::Force => commands::force(&resolved, &mut out)?,
        Command::Energy => commands::energy(&resolved, &mut out)?,
        Command::Minimize => commands::minimize(&resolved, &mut out)?,
        Command::Verify => commands::verify(&resolved, &mut out)?,
        Command::Sweep => commands::sweep(&resolved, &mut out)?,
    };
    for p in &out.written {
        println!("{}", p.display());
    }
    Ok(status)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.serial {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(1).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match run(&cli) {
        Ok(Status::Success) => ExitCode::SUCCESS,
        Ok(Status::Failure) => ExitCode::from(1),
        Err(e) if e.downcast_ref::<ConfigError>().is_some() => {
            eprintln!("config error: {e:#}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

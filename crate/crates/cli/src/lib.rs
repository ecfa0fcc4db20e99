//! `qedr` command-line pipeline: CSV ingestion and solver dispatch.

pub mod args;
pub mod commands;
pub mod config;
pub mod error;
pub mod io;

use std::ffi::OsString;

use clap::error::ErrorKind;
use clap::Parser;

use crate::args::Cli;
pub use crate::error::CliError;

fn configure_threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var("QEDR_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::input(format!("QEDR_THREADS must be a positive integer, got '{v}'")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::input(format!("QEDR_THREADS: {e}")))
}

fn dispatch(args: Vec<OsString>) -> Result<(), CliError> {
    let args = config::merge_config(args)?;
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return Ok(());
        }
        Err(e) => {
            let text = e.to_string();
            let first = text.lines().next().unwrap_or("invalid arguments");
            return Err(CliError::input(first.trim_start_matches("error: ").to_string()));
        }
    };
    configure_threads()?;
    commands::run(cli.command)
}

/// Runs with the given arguments; returns the process exit code.
pub fn run_with(args: Vec<OsString>) -> i32 {
    match dispatch(args) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("qedr: {}", e.line());
            e.exit_code()
        }
    }
}

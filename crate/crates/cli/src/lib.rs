//! Command-line front end for the `swapsim` simulator.

pub mod commands;
pub mod config;
pub mod report;

use std::path::Path;

pub use commands::{run, CliError, Output};
pub use config::{resolve, Cli};

/// Resolves flags, runs the command and writes the JSON report if requested.
pub fn execute(cli: &Cli) -> Result<Output, CliError> {
    let cfg = resolve(cli).map_err(CliError::Usage)?;
    let out = run(&cfg)?;
    if let Some(path) = &cli.opts.report {
        write_report(path, &out)?;
    }
    Ok(out)
}

fn write_report(path: &Path, out: &Output) -> Result<(), CliError> {
    std::fs::write(path, out.report.to_json() + "\n")
        .map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))
}

mod args;
mod commands;

use std::process::ExitCode;

use clap::Parser;

use crate::args::Cli;
use crate::commands::NumericFailure;

fn main() -> ExitCode {
    let cli = Cli::parse();
    if !(cli.config.tol > 0.0) || !cli.config.tol.is_finite() {
        eprintln!("error: tolerance must be positive and finite");
        return ExitCode::from(2);
    }
    match commands::dispatch(cli.command, &cli.config) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<NumericFailure>().is_some() {
                ExitCode::from(1)
            } else {
                ExitCode::from(2)
            }
        }
    }
}

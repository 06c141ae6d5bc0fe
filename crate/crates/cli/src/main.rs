//! Command-line front end. Every command writes one report (JSON or CSV) and
//! exits with 0 on success, 2 on invalid input, 3 when a value cannot be
//! certified and 4 when a consistency check fails.

mod args;
mod commands;
mod report;
mod verify;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::process::ExitCode;

use clap::Parser;

use args::Cli;
use commands::CliError;

fn emit(cli: &Cli, report: &report::Report) -> Result<(), CliError> {
    match &cli.opts.out {
        Some(path) => {
            let mut w = BufWriter::new(File::create(path)?);
            report.write(cli.opts.format, &mut w)?;
            w.flush()?;
        }
        None => {
            let stdout = io::stdout();
            let mut w = stdout.lock();
            report.write(cli.opts.format, &mut w)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = commands::run(&cli.command, &cli.opts).and_then(|r| {
        emit(&cli, &r)?;
        Ok(r.all_pass())
    });
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("painleve-tau: one or more checks failed");
            ExitCode::from(4)
        }
        Err(e) => {
            eprintln!("painleve-tau: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod args;
mod commands;
mod format;

use args::{Cli, Command};
use clap::error::ErrorKind;
use clap::Parser;
use std::process::ExitCode;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    let result = match &cli.command {
        Command::Curve(a) => commands::curve(a).map(|_| true),
        Command::Convert(a) => commands::convert(a).map(|_| true),
        Command::Compare(a) => commands::compare(a).map(|_| true),
        Command::Variance(a) => commands::variance(a).map(|_| true),
        Command::Validate(a) => commands::validate(a),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

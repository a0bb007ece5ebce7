mod args;
mod commands;
mod render;

use std::process::ExitCode;

use clap::Parser;
use krawtchouk::Error;

use args::{Cli, Command};

const EXIT_FAILURE: u8 = 1;
const EXIT_PRECONDITION: u8 = 2;
const EXIT_VERIFICATION: u8 = 3;

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Domain(_)
        | Error::Parse { .. }
        | Error::Truncation { .. }
        | Error::UnknownClaim(_)
        | Error::Tabulation(_) => EXIT_PRECONDITION,
        Error::Io(_) | Error::Json(_) | Error::Csv(_) => EXIT_FAILURE,
    }
}

fn run(cli: &Cli) -> Result<bool, Error> {
    let (outcome, out) = match &cli.command {
        Command::Eval(a) => (commands::eval(a)?, &a.common.out),
        Command::Expand(a) => (commands::expand(a)?, &a.common.out),
        Command::Verify(a) => (commands::verify(a)?, &a.common.out),
        Command::Table(a) => (commands::table(a)?, &a.common.out),
    };
    let text = outcome.document.render(outcome.format);
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(outcome.verified)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("error: verification failed");
            ExitCode::from(EXIT_VERIFICATION)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

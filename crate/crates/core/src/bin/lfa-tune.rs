use std::process::ExitCode;

use clap::Parser;
use lfa_tune::cli::{run, Cli};

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("lfa-tune: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

use std::process::ExitCode;

use clap::Parser;
use edgelearn::cli::{execute, Cli};

fn main() -> ExitCode {
    ExitCode::from(execute(Cli::parse()))
}

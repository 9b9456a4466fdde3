use std::process::ExitCode;

use clap::Parser;
use pinning::{run, Cli};

fn main() -> ExitCode {
    ExitCode::from(run(&Cli::parse()))
}

use std::process::ExitCode;

use clap::Parser;
use liftlab_runner::{run, Cli};

fn main() -> ExitCode {
    ExitCode::from(run(&Cli::parse()))
}

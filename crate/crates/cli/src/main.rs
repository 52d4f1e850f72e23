use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    calabi_cli::main_with(calabi_cli::Args::parse())
}

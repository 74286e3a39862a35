use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    let cli = pnrd_cli::Cli::parse();
    match pnrd_cli::execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(error) => {
            eprintln!("error: {error:#}");
            ExitCode::FAILURE
        }
    }
}

use clap::Parser;
use migrank_cli::{run, Cli};
use std::process::ExitCode;

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("migrank: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

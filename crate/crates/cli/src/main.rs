use std::process::ExitCode;

use clap::Parser;

use sweep_cli::{run, RunConfig, EXIT_ERROR};

fn main() -> ExitCode {
    let cfg = RunConfig::parse();
    let code = match run(&cfg) {
        Ok(outcome) => {
            print!("{}", outcome.report);
            outcome.code
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_ERROR
        }
    };
    ExitCode::from(code as u8)
}

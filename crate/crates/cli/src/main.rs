use std::process::ExitCode;

use clap::Parser;
use iwisdm_cli::args::Cli;

fn main() -> ExitCode {
    match iwisdm_cli::run(Cli::parse()) {
        Ok(out) => {
            if !out.is_empty() {
                println!("{out}");
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

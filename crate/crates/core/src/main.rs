use std::process::ExitCode;

use clap::Parser;
use qkerr::cli::{run, Cli};

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(paths) => {
            for path in paths {
                println!("{}", path.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("qkerr: {e}");
            ExitCode::FAILURE
        }
    }
}

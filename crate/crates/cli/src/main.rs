use std::process::ExitCode;

use clap::Parser;
use fockbench_cli::{execute, Cli, Exit};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { Exit::Parse as u8 } else { 0 });
        }
    };
    match execute(&cli) {
        Ok((exit, manifest)) => {
            println!("{}", manifest.display());
            ExitCode::from(exit as u8)
        }
        Err(e) => {
            eprintln!("fockbench: {e}");
            ExitCode::from(e.exit() as u8)
        }
    }
}

use std::process::ExitCode;

use clap::Parser;
use qpir::cli::{execute, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    match execute(&cli, &mut out) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("qpir: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

use std::process::ExitCode;

use clap::Parser;
use mobandit_tool::{configure_threads, execute, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut stdout = std::io::stdout().lock();
    match configure_threads().and_then(|()| execute(cli, &mut stdout)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("mobandit: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

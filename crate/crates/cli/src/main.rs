use std::process::ExitCode;

use clap::Parser;
use coxcell_cli::cli::configure_threads;
use coxcell_cli::Cli;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 3 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Err(e) = configure_threads(std::env::var("COXCELL_THREADS").ok().as_deref()) {
        eprintln!("error: {e}");
        return ExitCode::from(e.exit_code());
    }
    ExitCode::from(coxcell_cli::run(&cli))
}

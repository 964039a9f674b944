use std::process::ExitCode;

use clap::Parser;
use tabrot_cli::args::Cli;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut stdout = std::io::stdout().lock();
    match tabrot_cli::run(cli, &mut stdout) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(tabrot_cli::exit_code_for(&e))
        }
    }
}

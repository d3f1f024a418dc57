use std::process::ExitCode;

use clap::Parser;
use lexloop_cli::{run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut out = std::io::stdout().lock();
    let mut err = std::io::stderr();
    match run(cli, &mut out, &mut err) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("lexloop: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

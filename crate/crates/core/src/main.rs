use std::io;
use std::process::ExitCode;

use clap::Parser;
use fairlab::cli::{run, Cli, CliError};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let sub = std::env::args().nth(1).unwrap_or_default();
    match run(cli, &mut io::stdout().lock(), &mut io::stderr().lock()) {
        Ok(code) => ExitCode::from(code as u8),
        // A closed stdout (e.g. piped into `head`) is not a failure.
        Err(CliError::Io { err, .. }) if err.kind() == io::ErrorKind::BrokenPipe => ExitCode::SUCCESS,
        Err(e) => {
            let code = e.exit_code();
            eprintln!("error: {:#}", anyhow::Error::new(e).context(format!("fairlab {sub} failed")));
            ExitCode::from(code as u8)
        }
    }
}

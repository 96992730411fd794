use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use ofdmim_relay_cli::args::Cli;
use ofdmim_relay_cli::commands::Status;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(Status::ConfigError.code() as u8)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match ofdmim_relay_cli::run(&cli) {
        Ok(report) => {
            let _ = std::io::stdout().write_all(report.stdout.as_bytes());
            let _ = std::io::stderr().write_all(report.stderr.as_bytes());
            ExitCode::from(report.status.code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.status().code() as u8)
        }
    }
}

use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use farepanel_cli::{exit, run, Cli, CliError};

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .target(env_logger::Target::Stderr)
        .init();
    let cli = Cli::parse();
    let code = match run(&cli) {
        Ok(out) => {
            print!("{out}");
            exit::OK
        }
        Err(e) => {
            if let CliError::CheckFailed { report, .. } = &e {
                print!("{report}");
            }
            log::error!("{e}");
            e.exit_code()
        }
    };
    let _ = std::io::stdout().flush();
    ExitCode::from(code as u8)
}

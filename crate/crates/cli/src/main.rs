mod args;
mod commands;
mod output;
mod predict;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};

/// Process exit statuses.
pub mod status {
    pub const PASS: u8 = 0;
    pub const VERDICT_FAIL: u8 = 1;
    pub const USAGE: u8 = 2;
    pub const SOLVER: u8 = 3;
}

/// Failure of a subcommand, carrying the exit status.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn usage(message: impl Into<String>) -> Self {
        Failure {
            code: status::USAGE,
            message: message.into(),
        }
    }
}

impl From<stark_core::Error> for Failure {
    fn from(e: stark_core::Error) -> Self {
        Failure {
            code: exit_code(&e),
            message: e.to_string(),
        }
    }
}

/// Input problems map to the usage status; everything raised by the numerics to the solver status.
pub fn exit_code(e: &stark_core::Error) -> u8 {
    use stark_core::Error::*;
    match e {
        Config(_) | Parameter(_) | Range(_) | DomainAssumption(_) | Coverage(_) => status::USAGE,
        AtStep { source, .. } => exit_code(source),
        _ => status::SOLVER,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() {
                status::USAGE
            } else {
                status::PASS
            });
        }
    };
    let machine = cli.machine_readable;
    let result = match cli.command {
        Command::Predict(a) => predict::run(&a, machine),
        Command::Solve(a) => commands::solve(&a, machine),
        Command::Count(a) => commands::count(&a, machine),
        Command::Density(a) => commands::density(&a, machine),
        Command::Study(a) => commands::study(&a, machine),
        Command::BracketCheck(a) => commands::bracket_check(&a, machine),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

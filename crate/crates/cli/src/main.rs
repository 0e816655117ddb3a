use std::process::ExitCode;

use aloha_cli::{run, Cli};
use clap::Parser;

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(workers) = match &cli.command {
        aloha_cli::Command::Sim { workers, .. } => *workers,
        _ => None,
    } {
        if workers == 0 {
            eprintln!("{}", aloha_cli::CliError::Invalid("ALOHA_WORKERS must be at least 1".into()).to_json_line());
            return ExitCode::FAILURE;
        }
    }
    match run(&cli.command) {
        Ok(warnings) => {
            for w in warnings {
                eprintln!("{}", serde_json::json!({ "warning": w }));
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", e.to_json_line());
            ExitCode::FAILURE
        }
    }
}

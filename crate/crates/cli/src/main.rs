use clap::Parser;
use instinct_cli::{execute, prepare, summary_line, Cli};
use std::process::ExitCode;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = prepare(&cli).and_then(|scenario| execute(&cli, &scenario));
    match result {
        Ok(metrics) => {
            if cli.metrics_out.is_none() {
                println!("{}", serde_json::to_string_pretty(&metrics).expect("metrics serialize"));
            }
            eprintln!("{}", summary_line(&metrics));
            ExitCode::SUCCESS
        }
        Err(failure) => {
            eprintln!("error: {:#}", failure.error());
            ExitCode::from(failure.exit_code() as u8)
        }
    }
}

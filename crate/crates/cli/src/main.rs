mod args;
mod commands;
mod io;

use std::process::ExitCode;

use clap::Parser;
use serde_json::json;

use mimo_cs::Budget;

use args::{Cli, Command, ExperimentConfig, SCHEMA_VERSION};
use commands::{execute, Output};
use io::{decode, read_json, sidecar, usage, write_atomic, CliError, CliResult};

const BUDGET_ENV: &str = "MIMO_CS_BUDGET";

fn env_budget() -> CliResult<Option<u64>> {
    match std::env::var(BUDGET_ENV) {
        Ok(s) => s
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| usage(format!("{BUDGET_ENV}={s:?} is not a non-negative integer"))),
        Err(_) => Ok(None),
    }
}

/// Resolves the config to run: `run --config` loads one from disk, anything
/// else is built from the command line. Budget precedence: flag, config, env.
fn resolve(cli: &Cli) -> CliResult<ExperimentConfig> {
    let mut config = match &cli.command {
        Command::Run(r) => {
            let v = read_json(&r.config)?;
            let c: ExperimentConfig = decode(&r.config, &v)?;
            if c.schema_version != SCHEMA_VERSION {
                return Err(usage(format!(
                    "config schema_version {} is not supported (expected {SCHEMA_VERSION})",
                    c.schema_version
                )));
            }
            c
        }
        other => ExperimentConfig {
            schema_version: SCHEMA_VERSION,
            budget: None,
            command: other.clone(),
        },
    };
    let budget = match cli.budget.or(config.budget) {
        Some(b) => b,
        None => env_budget()?.unwrap_or(Budget::default().max_evaluations),
    };
    config.budget = Some(budget);
    Ok(config)
}

fn run(cli: &Cli) -> CliResult<()> {
    let config = resolve(cli)?;
    let budget = Budget::new(config.budget.expect("resolved"));
    let echo = serde_json::to_value(&config).expect("config serializes");

    match execute(&config.command, &budget)? {
        Output::Json(result) => {
            let doc = json!({ "schema_version": SCHEMA_VERSION, "config": echo, "result": result });
            let text = serde_json::to_string_pretty(&doc).expect("json") + "\n";
            match &cli.out {
                Some(p) => write_atomic(p, &text),
                None => {
                    print!("{text}");
                    Ok(())
                }
            }
        }
        Output::Csv { text, summary } => match &cli.out {
            Some(p) => {
                let doc =
                    json!({ "schema_version": SCHEMA_VERSION, "config": echo, "summary": summary });
                write_atomic(p, &text)?;
                write_atomic(
                    &sidecar(p),
                    &(serde_json::to_string_pretty(&doc).expect("json") + "\n"),
                )
            }
            None => {
                print!("{text}");
                Ok(())
            }
        },
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => report(e),
    }
}

fn report(e: CliError) -> ExitCode {
    eprintln!("{}", e.to_json());
    ExitCode::from(e.exit_code() as u8)
}

use std::fs;
use std::path::Path;
use std::process::ExitCode;

use clap::Parser;

use cce::cli::{cmd_cluster, cmd_trace, cmd_verify, trace_csv, Cli, Command, RunConfig};
use cce::CceError;

fn emit(path: Option<&Path>, text: &str) -> Result<(), CceError> {
    match path {
        Some(p) => fs::write(p, text).map_err(|source| CceError::Io {
            path: p.to_path_buf(),
            source,
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<(), CceError> {
    match cli.command {
        Command::Cluster(args) => {
            let config = RunConfig::from(args);
            let (doc, trace) = cmd_cluster(&config)?;
            if let Some(p) = &config.trace_output {
                emit(Some(p), &trace_csv(&trace, config.noise_threshold))?;
            }
            emit(config.output.as_deref(), &(doc.to_json() + "\n"))
        }
        Command::Trace(args) => {
            let config = RunConfig::from(args);
            let csv = cmd_trace(&config)?;
            emit(config.trace_output.as_deref().or(config.output.as_deref()), &csv)
        }
        Command::Verify { run, k } => {
            let config = RunConfig::from(run);
            let doc = cmd_verify(&config, k)?;
            let json = serde_json::to_string_pretty(&doc).expect("serializable");
            emit(config.output.as_deref(), &(json + "\n"))
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

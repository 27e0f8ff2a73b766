//! `qdisk`: runs one job described by a JSON configuration and writes its
//! JSON summary and CSV tables.
//!
//! Exit status: 0 success, 1 failed check, 2 configuration or parse error,
//! 3 numeric guard (overflow, ill-conditioning).

mod config;
mod jobs;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use serde_json::json;

use config::JobConfig;
use output::Failure;

#[derive(Debug, Parser)]
#[command(name = "qdisk", version, about = "Quantum-disk calculus and spectral diagnostics")]
struct Args {
    /// Job configuration (JSON) with a `command` field.
    #[arg(long)]
    config: PathBuf,
    /// Directory receiving `<command>.json` and `<command>_<table>.csv`.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Worker threads for parallel scans (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
    /// Seed of randomised checks.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn load(path: &PathBuf) -> Result<JobConfig, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))
}

fn execute(args: &Args) -> Result<(), Failure> {
    let config = load(&args.config)?;
    if let Some(n) = args.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Config(format!("--threads: {e}")))?;
    }
    let mut artifacts = jobs::run(&config, args.seed)?;
    artifacts.set("command", json!(config.name()));
    artifacts.set("config", serde_json::to_value(&config).expect("configs serialize"));
    artifacts.set("passed", json!(artifacts.failed_checks.is_empty()));
    artifacts.set("failed_checks", json!(artifacts.failed_checks));
    for path in artifacts.write(&args.out, config.name())? {
        println!("wrote {}", path.display());
    }
    if artifacts.failed_checks.is_empty() {
        Ok(())
    } else {
        Err(Failure::Check(artifacts.failed_checks.join("; ")))
    }
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(args) => args,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("qdisk: {}", failure.message());
            ExitCode::from(failure.exit_code())
        }
    }
}

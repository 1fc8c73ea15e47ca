mod commands;
mod config;
mod output;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use config::{usage, Cli, RunConfig, UsageError};

fn init_threads() -> Result<(), UsageError> {
    let Ok(raw) = std::env::var("STM_REG_THREADS") else {
        return Ok(());
    };
    let n: usize = match raw.trim().parse() {
        Ok(n) if n > 0 => n,
        _ => return usage(format!("STM_REG_THREADS must be a positive integer, got '{raw}'")),
    };
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .or_else(|e| usage(format!("cannot size thread pool: {e}")))
}

fn run(cli: Cli) -> anyhow::Result<bool> {
    init_threads()?;
    let cfg = RunConfig::from_cli(&cli)?;
    let out_path = cfg.out.clone();
    let command = cfg.command;
    let report = commands::run(cfg)?;

    let mut sink: Box<dyn Write> = match &out_path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).or_else(|e| usage(format!("cannot write {}: {e}", p.display())))?,
        )),
        None => Box::new(io::stdout().lock()),
    };
    report.write(&mut sink)?;
    sink.flush()?;

    let failed: Vec<_> = report.checks.iter().filter(|c| !c.passed).collect();
    for c in &failed {
        eprintln!("{c}");
    }
    eprintln!(
        "stm-reg {} {}: {} of {} checks passed",
        report.version,
        command.to_possible_value().map(|v| v.get_name().to_string()).unwrap_or_default(),
        report.checks.len() - failed.len(),
        report.checks.len()
    );
    Ok(report.passed)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) if e.is::<UsageError>() => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

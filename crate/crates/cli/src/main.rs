use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use stubgraph_cli::runner::{sweep_csv, write_outputs};
use stubgraph_cli::{parse_config, run_experiment, sweep, theory_cmd, ExperimentConfig};

/// Exit status when a pairing fails validation.
const EXIT_INVALID: u8 = 2;

#[derive(Parser)]
#[command(name = "stubgraph", version, about = "Stub pairing experiments on marked Poisson processes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run all replicates of a config and write the result files.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Overrides `output_dir`.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Repeat a run over several values of one parameter.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        param: String,
        /// Comma-separated values; may be empty.
        #[arg(long, default_value = "", allow_hyphen_values = true)]
        values: String,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Print a closed-form quantity as JSON.
    Theory {
        #[arg(long)]
        query: String,
        /// Comma-separated positional arguments.
        #[arg(long, default_value = "")]
        args: String,
        /// Degree law, e.g. "family=zipf;tau=3".
        #[arg(long)]
        degree: Option<String>,
    },
    /// Check a config without running it.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
}

fn load(path: &PathBuf) -> Result<ExperimentConfig> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_config(&text).with_context(|| format!("in {}", path.display()))
}

fn split_list(s: &str) -> Vec<String> {
    s.split(',').map(str::trim).filter(|v| !v.is_empty()).map(String::from).collect()
}

fn main() -> ExitCode {
    match real_main() {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn real_main() -> Result<ExitCode> {
    match Cli::parse().command {
        Command::Run { config, out, workers } => {
            let cfg = load(&config)?;
            let report = run_experiment(&cfg, workers)?;
            let dir = out.unwrap_or_else(|| cfg.output_dir.clone());
            write_outputs(&report, &dir)?;
            let a = &report.aggregate;
            println!(
                "{} replicates, {} points: mean T = {} (se {}), unpaired {}",
                report.replicates.len(),
                a.point_count,
                a.mean_t,
                a.stderr_t,
                a.unpaired_fraction
            );
            if !report.all_valid() {
                eprintln!("validator violations found; see {}", dir.join("summary.csv").display());
                return Ok(ExitCode::from(EXIT_INVALID));
            }
        }
        Command::Sweep { config, param, values, out, workers } => {
            let cfg = load(&config)?;
            let runs = sweep(&cfg, &param, &split_list(&values), workers)?;
            if runs.is_empty() {
                return Ok(ExitCode::SUCCESS);
            }
            let dir = out.unwrap_or_else(|| cfg.output_dir.clone());
            for (value, report) in &runs {
                write_outputs(report, &dir.join(format!("{param}={value}")))?;
                println!("{param} = {value}: mean T = {} (se {})", report.aggregate.mean_t, report.aggregate.stderr_t);
            }
            fs::write(dir.join("sweep.csv"), sweep_csv(&param, &runs))?;
            if !runs.iter().all(|(_, r)| r.all_valid()) {
                return Ok(ExitCode::from(EXIT_INVALID));
            }
        }
        Command::Theory { query, args, degree } => {
            let value = theory_cmd::evaluate(&query, &split_list(&args), degree.as_deref())?;
            println!("{}", serde_json::to_string_pretty(&value)?);
        }
        Command::Validate { config } => {
            let cfg = load(&config)?;
            println!("{}", serde_json::to_string_pretty(&cfg.raw)?);
        }
    }
    Ok(ExitCode::SUCCESS)
}

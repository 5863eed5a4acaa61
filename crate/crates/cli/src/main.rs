use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use maxreg_cli::{parse_config, run, CliError, RunOptions};

/// Maximal-regularity experiments driven by a TOML configuration.
#[derive(Debug, Parser)]
#[command(name = "maxreg", version)]
struct Args {
    /// Configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides `output.dir`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Random seed (overrides `output.seed`).
    #[arg(long)]
    seed: Option<u64>,
    /// Omit the timestamp from CSV headers.
    #[arg(long)]
    no_timestamp: bool,
    /// Worker threads for parallel sections.
    #[arg(long)]
    threads: Option<usize>,
}

fn main_inner(args: Args) -> Result<Vec<PathBuf>, CliError> {
    if let Some(n) = args.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::InvalidValue { key: "--threads".into(), reason: e.to_string() })?;
    }
    let text = std::fs::read_to_string(&args.config)?;
    let config = parse_config(&text)?;
    run(&config, &RunOptions { out: args.out, seed: args.seed, no_timestamp: args.no_timestamp })
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match main_inner(args) {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            if matches!(e, CliError::EmptyConfig) {
                eprintln!("usage: maxreg --config <path> [--out <dir>] [--seed <int>] [--no-timestamp] [--threads <int>]");
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

// negated float comparisons reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod error;
mod presets;
mod runner;
mod scenario;
mod units;

use error::CliError;

/// Frequency diverse array beampattern scenarios.
#[derive(Debug, Parser)]
#[command(name = "fdabeam", version)]
struct Cli {
    /// Worker threads for grid and quadrature evaluation (default: all cores).
    #[arg(long, global = true, env = "FDABEAM_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a scenario file.
    Run {
        file: PathBuf,
        /// Output directory (default: the scenario's [output] dir, else out/<name>).
        #[arg(long, env = "FDABEAM_OUT")]
        out: Option<PathBuf>,
    },
    /// Run a bundled preset.
    Preset {
        name: String,
        /// Output directory (default: out/<name>).
        #[arg(long, env = "FDABEAM_OUT")]
        out: Option<PathBuf>,
    },
    /// List bundled presets.
    ListPresets,
    /// Parse and validate a scenario file without running it.
    Validate { file: PathBuf },
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn run_text(text: &str, out: Option<PathBuf>) -> Result<(), CliError> {
    let scenario = scenario::parse(text)?;
    let dir = out
        .or_else(|| scenario.output_dir.clone())
        .unwrap_or_else(|| Path::new("out").join(&scenario.name));
    print!("{}", runner::run(&scenario, text, &dir)?);
    Ok(())
}

fn execute(cli: Cli) -> Result<(), CliError> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Validation("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Validation(format!("thread pool: {e}")))?;
    }
    match cli.command {
        Command::Run { file, out } => run_text(&read(&file)?, out),
        Command::Preset { name, out } => {
            let text = presets::find(&name).ok_or_else(|| {
                let names: Vec<&str> = presets::PRESETS.iter().map(|(n, _)| *n).collect();
                CliError::Validation(format!(
                    "unknown preset '{name}' (available: {})",
                    names.join(", ")
                ))
            })?;
            run_text(text, out)
        }
        Command::ListPresets => {
            for (name, text) in presets::PRESETS {
                let description = scenario::parse(text)?.description.unwrap_or_default();
                println!("{name:<6}  {description}");
            }
            Ok(())
        }
        Command::Validate { file } => {
            let s = scenario::parse(&read(&file)?)?;
            println!("{}: ok ({} evaluation(s))", s.name, s.evaluations.len());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("fdabeam: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

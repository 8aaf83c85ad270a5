//! `molgen`: generate molecules from a JSON requirement file, or explain why
//! none exist.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use molgen_core::diagnostics::{find_iis_with, format_infeasibility, DiagnoseError, IisOptions};
use molgen_core::generate::{generate_with, GenerateError, RunOptions};
use molgen_core::par::Execution;
use molgen_core::spec::RequirementSpec;

const EXIT_OK: u8 = 0;
const EXIT_ERROR: u8 = 1;
const EXIT_INFEASIBLE: u8 = 2;
/// Search ended without molecules and without a proof of infeasibility.
const EXIT_UNDECIDED: u8 = 3;

#[derive(Parser)]
#[command(
    name = "molgen",
    version,
    about = "Constraint-based molecular graph generation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Enumerate molecules satisfying the requirement file.
    Generate(GenerateArgs),
    /// Report the requirement groups that conflict with each other.
    Diagnose(DiagnoseArgs),
}

#[derive(Args)]
struct GenerateArgs {
    /// Requirement file (JSON).
    #[arg(long)]
    spec: PathBuf,
    /// Number of solutions to request from the search.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    num: u64,
    /// Solutions per batch; overrides the file's options.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    batch_size: Option<u64>,
    /// Seconds per batch; overrides the file's options.
    #[arg(long)]
    time_limit: Option<f64>,
    /// Seed of the first batch; overrides the file's options.
    #[arg(long)]
    seed: Option<u64>,
    /// SMILES output file, one per line (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write a JSON run report here.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Run batches one after another on the current thread.
    #[arg(long)]
    sequential: bool,
}

#[derive(Args)]
struct DiagnoseArgs {
    /// Requirement file (JSON).
    #[arg(long)]
    spec: PathBuf,
    /// Seconds allowed for each feasibility check.
    #[arg(long, default_value_t = 600.0)]
    time_limit: f64,
}

fn load_spec(path: &Path) -> Result<RequirementSpec, String> {
    let text =
        fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    RequirementSpec::from_json(&text).map_err(|e| format!("{}: {e}", path.display()))
}

fn seconds(value: f64) -> Result<Duration, String> {
    Duration::try_from_secs_f64(value).map_err(|_| format!("invalid time limit: {value}"))
}

fn write_output(path: Option<&Path>, text: &str) -> Result<(), String> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| format!("cannot write {}: {e}", p.display())),
        None => io::stdout()
            .lock()
            .write_all(text.as_bytes())
            .map_err(|e| format!("cannot write output: {e}")),
    }
}

fn cmd_generate(args: GenerateArgs) -> Result<u8, String> {
    let mut spec = load_spec(&args.spec)?;
    if let Some(b) = args.batch_size {
        spec.options.batch_size = b as usize;
    }
    if let Some(t) = args.time_limit {
        seconds(t)?;
        spec.options.time_limit_per_batch = t;
    }
    if let Some(s) = args.seed {
        spec.options.base_seed = s;
    }
    let execution = if args.sequential {
        Execution::Sequential
    } else {
        Execution::default()
    };
    let generation = match generate_with(&spec, args.num as usize, RunOptions { execution }) {
        Ok(g) => g,
        Err(GenerateError::Infeasible { message, .. }) => {
            eprintln!("{message}");
            return Ok(EXIT_INFEASIBLE);
        }
        Err(e) => return Err(e.to_string()),
    };

    let mut text = String::new();
    for s in generation.smiles() {
        text.push_str(s);
        text.push('\n');
    }
    write_output(args.out.as_deref(), &text)?;
    if let Some(path) = &args.report {
        let json = serde_json::to_string_pretty(&generation.report)
            .map_err(|e| format!("cannot encode report: {e}"))?;
        fs::write(path, json + "\n")
            .map_err(|e| format!("cannot write {}: {e}", path.display()))?;
    }
    let r = &generation.report;
    eprintln!(
        "{} unique of {} found ({} duplicates, {} rejected by check_later) in {:.2}s",
        r.unique, r.raw, r.duplicates, r.rejected_by_check_later, r.seconds
    );
    if generation.molecules.is_empty() {
        eprintln!("no molecules found within the time limit");
        return Ok(EXIT_UNDECIDED);
    }
    Ok(EXIT_OK)
}

fn cmd_diagnose(args: DiagnoseArgs) -> Result<u8, String> {
    let spec = load_spec(&args.spec)?;
    let compiled = spec.compile().map_err(|e| e.to_string())?;
    let opts = IisOptions {
        time_limit: Some(seconds(args.time_limit)?),
        ..IisOptions::default()
    };
    match find_iis_with(&compiled.model.model, &opts) {
        Ok(iis) => {
            println!("{}", format_infeasibility(&iis));
            Ok(EXIT_INFEASIBLE)
        }
        Err(DiagnoseError::Feasible) => {
            println!("Model is feasible.");
            Ok(EXIT_OK)
        }
        Err(DiagnoseError::Timeout) => {
            eprintln!("diagnosis timed out");
            Ok(EXIT_UNDECIDED)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_ERROR,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Generate(args) => cmd_generate(args),
        Command::Diagnose(args) => cmd_diagnose(args),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}

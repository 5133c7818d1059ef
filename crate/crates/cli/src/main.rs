//! `hydrotrack` — desk-scale simulator for acoustic TDOA localization,
//! Kalman trajectory tracking, and post-disconnection search planning.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use hydrotrack::config::{parse_config, validate_for_command, ParsedConfig};
use hydrotrack::output::{write_run_record, Format, Manifest};
use hydrotrack::{verbose_logging, CliError};
use hydrotrack_core::sim::{
    generate_grid_with, run_localization_experiment, run_search_experiment, run_tracking_experiment,
};

const EXIT_CODES_HELP: &str = "Exit codes:
  0  success
  2  command-line usage error
  3  configuration parse error (malformed JSON)
  4  configuration validation error (names the offending field)
  5  simulation or model error
  6  I/O error

Environment:
  HYDROTRACK_LOG  set non-empty to log defaults applied and files written
                  to stderr (verbosity only; never changes results)";

#[derive(Parser)]
#[command(
    name = "hydrotrack",
    version,
    about = "Acoustic TDOA localization, Kalman tracking, and search-region prediction",
    after_help = EXIT_CODES_HELP
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Grid localization experiment: solve every lattice point once
    Localize(RunArgs),
    /// Tracked-trajectory experiment: full localization + filtering pipeline
    Track(RunArgs),
    /// Disconnection experiment: tracking, then scenario propagation with
    /// search regions
    Search(RunArgs),
    /// Print the configured grid points as CSV on stdout
    Grid(GridArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Scenario configuration (JSON); a previously written manifest.json
    /// also works and reproduces its run
    #[arg(long)]
    config: PathBuf,
    /// Output directory for trajectory, metrics, and manifest files
    #[arg(long)]
    out: PathBuf,
    /// Override the seed from the config
    #[arg(long)]
    seed: Option<u64>,
    /// Data file format (the manifest is always JSON)
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Args)]
struct GridArgs {
    /// Scenario configuration (JSON) with a grid section
    #[arg(long)]
    config: PathBuf,
}

fn load(
    config: &Path,
    command: &str,
    seed_override: Option<u64>,
) -> Result<ParsedConfig, CliError> {
    let mut parsed = parse_config(config)?;
    if let Some(seed) = seed_override {
        parsed.scenario.seed = seed;
        parsed.resolved.seed = Some(seed);
    }
    validate_for_command(&parsed, command)?;
    if verbose_logging() {
        if parsed.defaults_applied.is_empty() {
            eprintln!("hydrotrack: no defaults applied");
        } else {
            eprintln!(
                "hydrotrack: defaults applied for {}",
                parsed.defaults_applied.join(", ")
            );
        }
    }
    Ok(parsed)
}

fn run_experiment(command: &str, args: &RunArgs) -> Result<(), CliError> {
    let parsed = load(&args.config, command, args.seed)?;
    let record = match command {
        "localize" => run_localization_experiment(&parsed.scenario)?,
        "track" => run_tracking_experiment(&parsed.scenario)?,
        "search" => run_search_experiment(&parsed.scenario)?,
        other => unreachable!("unknown command {other}"),
    };
    let manifest = Manifest::new(command, args.format, &parsed.resolved);
    let written = write_run_record(&record, &args.out, args.format, &manifest)?;
    if verbose_logging() {
        for path in &written {
            eprintln!("hydrotrack: wrote {}", path.display());
        }
    }
    println!("{}", args.out.display());
    Ok(())
}

fn run_grid(args: &GridArgs) -> Result<(), CliError> {
    let parsed = load(&args.config, "grid", None)?;
    let grid = parsed.scenario.grid.as_ref().expect("validated grid");
    println!("x_m,y_m,z_m");
    for p in generate_grid_with(grid.origin, grid.spacing, grid.counts, grid.descend_z) {
        println!("{},{},{}", p.x, p.y, p.z);
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Localize(args) => run_experiment("localize", args),
        Command::Track(args) => run_experiment("track", args),
        Command::Search(args) => run_experiment("search", args),
        Command::Grid(args) => run_grid(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("hydrotrack: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

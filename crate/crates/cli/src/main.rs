use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use kgpoint_cli::config::RunConfig;
use kgpoint_cli::runs::{self, Log};
use kgpoint_cli::CliError;

#[derive(Parser)]
#[command(
    name = "kgpoint",
    version,
    about = "Klein-Gordon field with a point nonlinearity"
)]
struct Cli {
    #[command(subcommand)]
    verb: Verb,
    /// Run configuration (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory; overrides `output.directory`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for the parallel stages.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Suppress progress output.
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Subcommand)]
enum Verb {
    /// Integrate the reduced equation and write all diagnostics.
    Simulate,
    /// Run the kernel oracle suite.
    VerifyKernels,
    /// Tabulate solitary-wave amplitudes across the gap.
    SolitonScan,
    /// Recompute spectra from an existing trajectory.csv.
    Spectrum {
        /// Trajectory to read; defaults to `<out>/trajectory.csv`.
        #[arg(long)]
        input: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(format!("--threads: {e}")))?;
    }
    let path = cli
        .config
        .ok_or_else(|| CliError::Config("--config PATH is required".into()))?;
    let cfg = RunConfig::load(&path)?;
    let log = Log { quiet: cli.quiet };
    let dir = runs::out_dir(&cfg, cli.out.as_ref());
    match cli.verb {
        Verb::Simulate => runs::simulate(&cfg, &dir, log).map(|_| ()),
        Verb::VerifyKernels => runs::verify_kernels(&cfg, log),
        Verb::SolitonScan => runs::soliton_scan(&cfg, &dir, log).map(|_| ()),
        Verb::Spectrum { input } => {
            let input = input.unwrap_or_else(|| dir.join("trajectory.csv"));
            runs::spectrum(&cfg, &input, &dir, log).map(|_| ())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("kgpoint: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

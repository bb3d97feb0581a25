use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use riccati_escape::job::{self, Command, JobConfig, Overrides};

#[derive(Clone, Copy, ValueEnum)]
enum Subcommand {
    /// Escape time from one initial state, with the full step sequence.
    EscapeTime,
    /// Escape time as a function of the initial state.
    Profile,
    /// Mean escape times of the switched equation on an angle grid.
    MeanEscape,
    /// Monte Carlo estimate of the mean escape time.
    Simulate,
    /// Cross-check the series solution against Monte Carlo.
    Verify,
}

impl From<Subcommand> for Command {
    fn from(s: Subcommand) -> Self {
        match s {
            Subcommand::EscapeTime => Command::EscapeTime,
            Subcommand::Profile => Command::Profile,
            Subcommand::MeanEscape => Command::MeanEscape,
            Subcommand::Simulate => Command::Simulate,
            Subcommand::Verify => Command::Verify,
        }
    }
}

/// Escape times of (Poisson-switched) matrix Riccati differential equations.
///
/// Exit status: 0 success, 1 I/O error, 2 invalid config, 3 some
/// deterministic escape time is unbounded, 4 numerical failure or failed
/// verification.
#[derive(Parser)]
#[command(version)]
struct Cli {
    #[arg(value_enum)]
    command: Subcommand,
    /// JSON job config.
    #[arg(long)]
    config: PathBuf,
    /// Directory for the CSV/JSON artifacts.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Worker threads (defaults to the number of cores).
    #[arg(long)]
    threads: Option<usize>,
    /// Overrides the seed of the config.
    #[arg(long)]
    seed: Option<u64>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: --threads: {e}");
            return ExitCode::from(2);
        }
    }
    let result = JobConfig::from_file(&cli.config)
        .and_then(|cfg| job::run(cli.command.into(), cfg, Overrides { seed: cli.seed }, &cli.out));
    match result {
        Ok(report) => {
            println!("{}", report.summary);
            for f in &report.files {
                eprintln!("wrote {}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

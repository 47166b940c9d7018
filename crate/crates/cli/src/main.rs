mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use bfd_core::harness::StudyKind;
use bfd_core::BfdError;
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "bfd", version, about = "Boussinesq-Full Dispersion internal-wave solver")]
#[command(after_help = after_help())]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Single run with snapshots, energy CSV and event log
    Simulate { config: PathBuf },
    /// Lifespan sweep over study.epsilons
    Lifespan { config: PathBuf },
    /// Hamiltonian drift over study.dts (b = d only)
    Conserve { config: PathBuf },
    /// Smallness invariant check (b = d > 0, c < 0)
    Smallness { config: PathBuf },
    /// Energy equivalence ratios over (epsilon, mu)
    Equivalence { config: PathBuf },
    /// Symbol table along the positive xi_1 axis as CSV
    Symbols { config: PathBuf },
}

fn after_help() -> String {
    format!(
        "{}\nExit status: 0 success, 2 config error, 3 unsupported case, 4 I/O, 5 invariant failure.\nBFD_THREADS caps the number of parallel sweep jobs.",
        config::keys_help()
    )
}

/// Exit code and machine-readable reason.
fn classify(err: &BfdError) -> (u8, &'static str) {
    match err {
        BfdError::Config(_) => (2, "config-error"),
        BfdError::ParameterDomain { .. } => (2, "parameter-domain"),
        BfdError::IllPosed(_) => (2, "ill-posed"),
        BfdError::GridMismatch(_) => (2, "grid-mismatch"),
        BfdError::UnsupportedCase(_) => (3, "unsupported-case"),
        BfdError::UnsupportedDimension { .. } => (3, "unsupported-dimension"),
        BfdError::Io(_) | BfdError::Csv(_) | BfdError::Json(_) => (4, "io-error"),
        BfdError::Format(_) => (4, "format-error"),
        BfdError::Invariant(_) => (5, "invariant-failure"),
        BfdError::BlowUp { .. } => (5, "blow-up"),
    }
}

fn set_threads() -> Result<(), BfdError> {
    let Ok(value) = std::env::var("BFD_THREADS") else {
        return Ok(());
    };
    let n: usize = value
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| BfdError::Config(format!("BFD_THREADS = \"{value}\", expected a positive integer")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| BfdError::Config(e.to_string()))
}

fn run(cli: Cli) -> Result<String, BfdError> {
    set_threads()?;
    let (path, kind) = match &cli.command {
        Command::Simulate { config } => (config, None),
        Command::Symbols { config } => (config, None),
        Command::Lifespan { config } => (config, Some(StudyKind::Lifespan)),
        Command::Conserve { config } => (config, Some(StudyKind::Conservation)),
        Command::Smallness { config } => (config, Some(StudyKind::Smallness)),
        Command::Equivalence { config } => (config, Some(StudyKind::Equivalence)),
    };
    let cfg = config::load(path)?;
    match (&cli.command, kind) {
        (Command::Simulate { .. }, _) => commands::simulate(&cfg, path),
        (Command::Symbols { .. }, _) => commands::symbols(&cfg, path),
        (_, Some(kind)) => commands::study(&cfg, kind, path),
        _ => unreachable!("every subcommand is handled"),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(msg) => {
            println!("{msg}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            let (code, reason) = classify(&e);
            let detail = e.to_string().replace('\n', " ");
            eprintln!("bfd: {reason}: {detail}");
            ExitCode::from(code)
        }
    }
}

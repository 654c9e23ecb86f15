//! `nvdd`: command-line driver for the decoupling simulator.
//!
//! Subcommands fall in two groups: config-driven scans (`trace`, `run`,
//! `floquet-scan`, `gap`, `modspec`, `dip`, `suppress`) read an experiment
//! description from `--config` and write one result table; presets
//! (`preset-*`) carry their own parameters, write several tables, and
//! verify themselves with internal checks.
//!
//! Exit codes: 0 success, 1 output I/O failure, 2 invalid arguments or
//! config, 3 failed preset check.

mod output;
mod presets;
mod scans;

use std::fmt;
use std::fs;
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use nvdd_core::config::ExperimentConfig;

use output::Format;

/// Failure modes, one per exit code.
#[derive(Debug)]
pub enum CliError {
    /// Filesystem failure while writing results (exit 1).
    Io(String),
    /// Bad arguments or configuration (exit 2).
    Invalid(String),
    /// A preset's internal check failed (exit 3).
    CheckFailed(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Io(m) | CliError::Invalid(m) => write!(f, "{m}"),
            CliError::CheckFailed(m) => write!(f, "checks failed: {m}"),
        }
    }
}

impl From<nvdd_core::Error> for CliError {
    fn from(e: nvdd_core::Error) -> Self {
        CliError::Invalid(e.to_string())
    }
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Io(_) => 1,
            CliError::Invalid(_) => 2,
            CliError::CheckFailed(_) => 3,
        }
    }
}

/// Coherence dips of a driven NV electron spin coupled to single nuclear
/// spins: exact propagation, closed-form dip models, and Floquet spectra.
#[derive(Parser)]
#[command(name = "nvdd", version)]
struct Cli {
    /// Experiment description, TOML or JSON.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Directory result tables are written into.
    #[arg(long, global = true, default_value = "nvdd-out", value_name = "DIR")]
    out: PathBuf,

    /// Worker threads; defaults to all cores.
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,

    /// Output encoding for result tables.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exact coherence trace of the configured scan.
    Trace,
    /// Folded quasienergy branches over the configured period scan.
    FloquetScan {
        /// Frequency-block truncation; default grows with scan.k.
        #[arg(long, value_name = "L")]
        l_max: Option<usize>,
    },
    /// Avoided-crossing gap at harmonic scan.k, one row per target.
    Gap,
    /// Fourier table of the sequence's modulation functions.
    Modspec {
        /// Largest harmonic tabulated.
        #[arg(long, default_value_t = 24, value_name = "K")]
        k_max: u32,
    },
    /// Closed-form dip curve and envelope over the configured period scan.
    Dip,
    /// Suppressing and enhancing global phases at harmonic scan.k.
    Suppress,
    /// Dip survey of one nuclear target: finite vs ideal pulses, plus the
    /// quasienergy landscape behind the dips.
    PresetSurvey,
    /// Closed-form dip curves against exact propagation at an expected
    /// and a spurious crossing.
    PresetOverlay,
    /// Two near-degenerate nuclei: merged at the fundamental dip, split
    /// at the phase-enhanced transverse harmonic.
    PresetResolve,
    /// Isotope pairs with coinciding dips and the global phase that
    /// suppresses the impostor.
    PresetMimics,
    /// The configured scan with its configured method.
    Run,
}

fn main() {
    let cli = Cli::parse();
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            log::warn!("thread pool: {e}");
        }
    }
    if let Err(e) = dispatch(&cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}

fn dispatch(cli: &Cli) -> Result<(), CliError> {
    let table = match &cli.command {
        Command::PresetSurvey => return presets::survey(&cli.out, cli.format),
        Command::PresetOverlay => return presets::overlay(&cli.out, cli.format),
        Command::PresetResolve => return presets::resolve(&cli.out, cli.format),
        Command::PresetMimics => return presets::mimics(&cli.out, cli.format),
        Command::Trace => scans::trace(&load_config(cli)?)?,
        Command::FloquetScan { l_max } => scans::floquet_scan(&load_config(cli)?, *l_max)?,
        Command::Gap => scans::gap(&load_config(cli)?)?,
        Command::Modspec { k_max } => scans::modspec(&load_config(cli)?, *k_max)?,
        Command::Dip => scans::dip(&load_config(cli)?)?,
        Command::Suppress => scans::suppress(&load_config(cli)?)?,
        Command::Run => scans::run(&load_config(cli)?)?,
    };
    let path = table.write(&cli.out, cli.format)?;
    println!("wrote {}", path.display());
    Ok(())
}

fn load_config(cli: &Cli) -> Result<ExperimentConfig, CliError> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| CliError::Invalid("this command needs --config <FILE>".into()))?;
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Invalid(format!("read {}: {e}", path.display())))?;
    Ok(ExperimentConfig::parse(&text)?)
}

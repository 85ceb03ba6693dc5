//! Command-line driver: argument parsing, validation, exit codes and
//! atomic output.
//!
//! Every command validates its whole configuration before doing any work and
//! writes its files through temporaries in the destination directory, so a
//! failed run leaves nothing behind.

mod commands;
pub mod verify;

use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use tempfile::NamedTempFile;

use crate::error::Error;
use crate::model::InitialConditionKind;

pub use verify::{run_suite, CheckOutcome, SuiteReport, VerifyContext};

/// Environment variable holding the default worker-thread count.
pub const THREADS_ENV: &str = "ISING_CYCLE_THREADS";

#[derive(Debug, Parser)]
#[command(name = "ising-cycle", version, about = "Glauber dynamics of the Ising model on the cycle")]
pub struct Cli {
    /// Worker threads; results do not depend on this value.
    #[arg(long, global = true, env = THREADS_ENV)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the invariant suite and report pass/fail per check.
    Verify(VerifyArgs),
    /// Statistic-based TV lower bounds along a time grid.
    MixingCurve(MixingCurveArgs),
    /// Predicted mixing constants (and exact mixing times for small n) over a beta grid.
    Sweep(SweepArgs),
    /// Backward update-support histories and their summary statistics.
    Support(SupportArgs),
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Run only checks whose module equals NAME or whose full name contains it.
    #[arg(long, value_name = "NAME")]
    pub filter: Option<String>,
}

/// Whether to include the exact-oracle columns.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ExactMode {
    /// Include them when n is within the oracle limit.
    Auto,
    /// Require them; larger n is a capacity error.
    Always,
    Never,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum InitArg {
    Alt,
    Blt,
    Plus,
    Annealed,
}

impl From<InitArg> for InitialConditionKind {
    fn from(a: InitArg) -> Self {
        match a {
            InitArg::Alt => Self::Alt,
            InitArg::Blt => Self::Blt,
            InitArg::Plus => Self::Plus,
            InitArg::Annealed => Self::UniformRandom,
        }
    }
}

#[derive(Debug, Args)]
pub struct MixingCurveArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub beta: f64,
    #[arg(long, value_enum)]
    pub init: InitArg,
    #[arg(long)]
    pub t_max: f64,
    /// Number of grid points in [0, t-max], end points included.
    #[arg(long)]
    pub t_steps: usize,
    #[arg(long, default_value_t = crate::stats::CURVE_REPLICAS)]
    pub replicas: usize,
    #[arg(long)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = ExactMode::Auto)]
    pub exact: ExactMode,
    /// CSV output; the JSON sidecar goes next to it with a `.json` extension.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub n: usize,
    /// `START:STOP:STEPS`, STEPS points with both ends included.
    #[arg(long, value_name = "START:STOP:STEPS")]
    pub beta_grid: String,
    #[arg(long, default_value_t = 0.25)]
    pub eps: f64,
    #[arg(long)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = ExactMode::Auto)]
    pub exact: ExactMode,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SupportArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub beta: f64,
    #[arg(long)]
    pub horizon: f64,
    #[arg(long)]
    pub replicas: usize,
    #[arg(long)]
    pub seed: u64,
    /// Query sites (comma separated); all sites by default.
    #[arg(long, value_delimiter = ',')]
    pub sites: Option<Vec<usize>>,
    /// Separation threshold of the cluster decomposition; default round(ln^2 n).
    #[arg(long)]
    pub d_sep: Option<usize>,
    /// Size threshold of the cluster decomposition; default round(ln^3 n).
    #[arg(long)]
    pub d_max: Option<usize>,
    /// Displacement threshold of the spread event; defaults to the separation threshold.
    #[arg(long)]
    pub spread: Option<usize>,
    /// Skip the per-segment trajectory CSV and write only the summary.
    #[arg(long)]
    pub summary_only: bool,
    /// Trajectory CSV; the JSON summary goes next to it with a `.json` extension.
    #[arg(long)]
    pub out: PathBuf,
}

/// Failure classes, each with its own exit code.
#[derive(Debug)]
pub enum CliError {
    Invariant(String),
    Config(String),
    Capacity(String),
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Invariant(_) | Self::Runtime(_) => 1,
            Self::Config(_) => 2,
            Self::Capacity(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Invariant(m) => write!(f, "invariant failure: {m}"),
            Self::Config(m) => write!(f, "invalid configuration: {m}"),
            Self::Capacity(m) => write!(f, "capacity exceeded: {m}"),
            Self::Runtime(m) => write!(f, "error: {m}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidParameter(m) => Self::Config(m),
            Error::Capacity { .. } => Self::Capacity(e.to_string()),
            other => Self::Runtime(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::Runtime(e.to_string())
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

/// Parses the process arguments and runs the command.
pub fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code())
        }
    }
}

pub fn run(cli: &Cli) -> CliResult<()> {
    if let Some(threads) = cli.threads {
        if threads == 0 {
            return Err(CliError::Config("thread count must be at least 1".into()));
        }
        // Fails only if a pool already exists, which is harmless.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    }
    match &cli.command {
        Command::Verify(a) => {
            let report = run_suite(&VerifyContext::default(), a.filter.as_deref())?;
            let stdout = std::io::stdout();
            report.print(&mut stdout.lock())?;
            if report.all_passed() {
                Ok(())
            } else {
                let failed: Vec<&str> = report.failures().map(|c| c.name.as_str()).collect();
                Err(CliError::Invariant(failed.join(", ")))
            }
        }
        Command::MixingCurve(a) => commands::mixing_curve(a),
        Command::Sweep(a) => commands::sweep(a),
        Command::Support(a) => commands::support(a),
    }
}

/// `out` with a `.json` extension, refusing to collide with `out` itself.
fn sidecar_path(out: &Path) -> CliResult<PathBuf> {
    let side = out.with_extension("json");
    if side == out {
        return Err(CliError::Config(format!(
            "output {} already has a .json extension; the sidecar would overwrite it",
            out.display()
        )));
    }
    Ok(side)
}

/// The directory an output file will be created in, which must exist.
fn output_dir(out: &Path) -> CliResult<PathBuf> {
    if out.file_name().is_none() || out.is_dir() {
        return Err(CliError::Config(format!("output {} is not a file path", out.display())));
    }
    let dir = match out.parent() {
        Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
        _ => PathBuf::from("."),
    };
    if !dir.is_dir() {
        return Err(CliError::Config(format!("output directory {} does not exist", dir.display())));
    }
    Ok(dir)
}

/// Temporary files that become the outputs only when every one of them has
/// been written; dropped temporaries are removed.
struct StagedOutputs {
    staged: Vec<(NamedTempFile, PathBuf)>,
}

impl StagedOutputs {
    fn new() -> Self {
        Self { staged: Vec::new() }
    }

    fn create(&mut self, path: &Path) -> CliResult<&mut NamedTempFile> {
        let dir = output_dir(path)?;
        let file = NamedTempFile::new_in(dir)?;
        self.staged.push((file, path.to_path_buf()));
        Ok(&mut self.staged.last_mut().unwrap().0)
    }

    fn write_all(&mut self, path: &Path, bytes: &[u8]) -> CliResult<()> {
        self.create(path)?.write_all(bytes)?;
        Ok(())
    }

    fn commit(self) -> CliResult<()> {
        for (mut file, path) in self.staged {
            file.flush()?;
            file.persist(&path).map_err(|e| CliError::Runtime(e.to_string()))?;
        }
        Ok(())
    }
}

fn to_json<T: Serialize>(value: &T) -> CliResult<Vec<u8>> {
    let mut bytes = serde_json::to_vec_pretty(value).map_err(|e| CliError::Runtime(e.to_string()))?;
    bytes.push(b'\n');
    Ok(bytes)
}

/// `steps` evenly spaced points from `lo` to `hi`, both included.
fn linspace(lo: f64, hi: f64, steps: usize) -> Vec<f64> {
    match steps {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..steps).map(|k| lo + (hi - lo) * k as f64 / (steps - 1) as f64).collect(),
    }
}

/// Parses `START:STOP:STEPS`.
pub fn parse_grid(spec: &str) -> CliResult<(f64, f64, usize)> {
    let bad = || CliError::Config(format!("grid {spec:?} is not of the form START:STOP:STEPS"));
    let parts: Vec<&str> = spec.split(':').collect();
    let [start, stop, steps] = parts.as_slice() else {
        return Err(bad());
    };
    let start: f64 = start.trim().parse().map_err(|_| bad())?;
    let stop: f64 = stop.trim().parse().map_err(|_| bad())?;
    let steps: usize = steps.trim().parse().map_err(|_| bad())?;
    if steps == 0 {
        return Err(CliError::Config("grid needs at least one point".into()));
    }
    if !(start.is_finite() && stop.is_finite()) || stop < start {
        return Err(CliError::Config(format!("grid bounds must be finite with START <= STOP, got {spec:?}")));
    }
    if steps == 1 && stop != start {
        return Err(CliError::Config("a one-point grid needs START == STOP".into()));
    }
    Ok((start, stop, steps))
}

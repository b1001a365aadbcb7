//! Command-line front end for `rtsl-core`.
//!
//! Exit codes: 0 on success, 1 when a check fails, 2 on usage or input
//! errors. `RTSL_THREADS` caps the number of worker threads.

pub mod commands;
pub mod config;
pub mod output;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use config::{EnergyGrid, RunConfig, RunMetadata};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

pub const THREADS_ENV: &str = "RTSL_THREADS";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("check failed: {0}")]
    Check(String),
    #[error(transparent)]
    Core(#[from] rtsl_core::Error),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use rtsl_core::Error as E;
        match self {
            CliError::Check(_) => EXIT_CHECK_FAILED,
            CliError::Core(e) => match e {
                E::CheckFailed(_)
                | E::NoConvergence { .. }
                | E::SingularTruncation { .. }
                | E::NotSymmetric(_)
                | E::InsufficientDecayWindow { .. }
                | E::NonFinite(_) => EXIT_CHECK_FAILED,
                _ => EXIT_USAGE,
            },
            CliError::Usage(_) | CliError::Io(_) | CliError::Csv(_) | CliError::Json(_) => {
                EXIT_USAGE
            }
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "rtsl",
    version,
    about = "Spectral laboratory for the Laplacian on random radial trees"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Monte Carlo Lyapunov exponents on an energy grid.
    Lyapunov(LyapunovArgs),
    /// Eigenvalue histogram of a random truncation.
    Spectrum(SpectrumArgs),
    /// Decay rates of truncation eigenvectors against Lyapunov exponents.
    Decay(DecayArgs),
    /// Weyl-vector residuals on planted constant runs.
    Weyl(WeylArgs),
    /// Block decomposition checks on a finite tree.
    DecomposeVerify(DecomposeArgs),
    /// Decay of a half-line eigenvector lifted into a tree block.
    TreeDecay(TreeDecayArgs),
    /// Diagonal products and invariant directions of transfer matrices.
    Furstenberg(FurstenbergArgs),
    /// SVG line plot of two CSV columns.
    Plot(PlotArgs),
}

const DEFAULT_DIST: &str = "2:0.5,3:0.5";

#[derive(Debug, Args)]
pub struct LyapunovArgs {
    #[arg(long, default_value = DEFAULT_DIST)]
    pub dist: String,
    #[arg(long, default_value_t = -4.0, allow_negative_numbers = true)]
    pub emin: f64,
    #[arg(long, default_value_t = 4.0, allow_negative_numbers = true)]
    pub emax: f64,
    #[arg(long, default_value_t = 161)]
    pub steps: usize,
    /// Explicit energies; overrides the grid.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub energies: Option<Vec<f64>>,
    #[arg(long, default_value_t = 100_000)]
    pub n: usize,
    #[arg(long, default_value_t = 32)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// CSV output; printed to stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SpectrumArgs {
    #[arg(long, default_value = DEFAULT_DIST)]
    pub dist: String,
    #[arg(long, default_value_t = 20_000)]
    pub size: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 50)]
    pub bins: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DecayArgs {
    #[arg(long, default_value = DEFAULT_DIST)]
    pub dist: String,
    #[arg(long, default_value_t = 2000)]
    pub size: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Energy window `a,b`.
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "0.9,1.1",
        allow_negative_numbers = true
    )]
    pub window: Vec<f64>,
    /// Steps per sample for the reference exponents.
    #[arg(long, default_value_t = 20_000)]
    pub ref_n: usize,
    #[arg(long, default_value_t = 8)]
    pub ref_samples: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct WeylArgs {
    /// Largest branching value `d_mu`; the background law is uniform on `2..=dmax`.
    #[arg(long, default_value_t = 3)]
    pub dmax: u32,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub energy: f64,
    #[arg(long, value_delimiter = ',', default_value = "16,64,256,1024")]
    pub runs: Vec<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DecomposeArgs {
    /// Explicit branching numbers; otherwise drawn from `--dist` with `--seed`.
    #[arg(long, value_delimiter = ',')]
    pub branching: Option<Vec<u32>>,
    #[arg(long)]
    pub depth: usize,
    #[arg(long, default_value = DEFAULT_DIST)]
    pub dist: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
}

#[derive(Debug, Args)]
pub struct TreeDecayArgs {
    #[arg(long, default_value = DEFAULT_DIST)]
    pub dist: String,
    /// Seed for the branching numbers of the tree.
    #[arg(long, default_value_t = 0)]
    pub branching_seed: u64,
    #[arg(long, default_value_t = 80)]
    pub depth: usize,
    /// Block generation.
    #[arg(long = "N", default_value_t = 0)]
    pub block: usize,
    /// Copy index within the block generation (1-based).
    #[arg(long, default_value_t = 1)]
    pub k: u128,
    /// Target energy; the closest block eigenvalue is used.
    #[arg(long, default_value_t = 3.3, allow_negative_numbers = true)]
    pub energy: f64,
    #[arg(long, default_value_t = 0.05)]
    pub eps: f64,
    #[arg(long, default_value_t = 20_000)]
    pub ref_n: usize,
    #[arg(long, default_value_t = 8)]
    pub ref_samples: usize,
    /// CSV of the per-generation sup of the lift.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FurstenbergArgs {
    #[arg(long, default_value_t = 3)]
    pub alpha: u32,
    #[arg(long, default_value_t = 2)]
    pub beta: u32,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub energy: f64,
    #[arg(long, default_value_t = 10)]
    pub n: u32,
    /// Law whose atoms are checked for invariant directions (default: uniform on alpha, beta).
    #[arg(long)]
    pub dist: Option<String>,
}

#[derive(Debug, Args)]
pub struct PlotArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Column for the horizontal axis (default: first column).
    #[arg(long)]
    pub x: Option<String>,
    /// Column for the vertical axis (default: second column).
    #[arg(long)]
    pub y: Option<String>,
    /// Column of error bar half-widths (default: `std_err` when present).
    #[arg(long)]
    pub err: Option<String>,
    #[arg(long, default_value = "")]
    pub title: String,
}

fn thread_count() -> Result<Option<usize>, CliError> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n >= 1 => Ok(Some(n)),
            _ => Err(CliError::Usage(format!(
                "{THREADS_ENV} must be a positive integer, got {v:?}"
            ))),
        },
    }
}

/// Parses `argv` (including the program name), runs the command and returns
/// the exit code. Reports go to `out`, diagnostics to `err`.
pub fn run_with_io<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                err.write_all(text.as_bytes())
            } else {
                out.write_all(text.as_bytes())
            };
            return code;
        }
    };
    let mut buffer = Vec::new();
    let result = thread_count().and_then(|threads| match threads {
        None => commands::dispatch(&cli.command, &mut buffer),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| CliError::Usage(format!("cannot build thread pool: {e}")))?;
            pool.install(|| commands::dispatch(&cli.command, &mut buffer))
        }
    });
    let _ = out.write_all(&buffer);
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

/// [`run_with_io`] on the process's stdout and stderr.
pub fn run_command<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with_io(argv, &mut stdout.lock(), &mut stderr.lock())
}

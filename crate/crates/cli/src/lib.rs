//! Command-line front end: load a JSON model, run one command, write
//! machine-readable reports.
//!
//! Exit codes are a stable contract: 0 success, 1 a validation or
//! verification failure, 2 an input error.

pub mod commands;
pub mod output;

use std::fmt;
use std::path::{Path, PathBuf};

use clap::Args;
use dcj::config::{ConfigError, ModelConfig};
use dcj::Spec;

pub use commands::{cmd_report, cmd_simulate, cmd_stationary, cmd_validate, cmd_verify, Outcome};
pub use output::Provenance;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

/// Flags shared by every command.
#[derive(Args, Debug, Clone, PartialEq)]
pub struct Options {
    /// Model configuration (JSON).
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    /// Random seed; overrides the config's seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Events per replica (simulate).
    #[arg(long, conflicts_with = "time")]
    pub events: Option<u64>,
    /// Simulated time per replica (simulate).
    #[arg(long)]
    pub time: Option<f64>,
    /// Independent replicas (simulate).
    #[arg(long)]
    pub replicas: Option<u64>,
    /// Pass/fail tolerance for symmetry conditions and detailed balance.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Task cap of the truncation box for open task boundaries.
    #[arg(long)]
    pub nmax: Option<u32>,
    /// DC cap of the truncation box for open zero-range DCs.
    #[arg(long)]
    pub ymax: Option<u32>,
}

impl Options {
    pub fn new(config: impl Into<PathBuf>, out: impl Into<PathBuf>) -> Self {
        Self {
            config: config.into(),
            out: out.into(),
            seed: None,
            events: None,
            time: None,
            replicas: None,
            tol: None,
            nmax: None,
            ymax: None,
        }
    }
}

/// Whether an error is the user's input or a failed check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Input,
    Failed,
}

#[derive(Debug)]
pub struct CliError {
    pub kind: ErrorKind,
    pub error: anyhow::Error,
}

impl CliError {
    pub fn input(error: impl Into<anyhow::Error>) -> Self {
        Self {
            kind: ErrorKind::Input,
            error: error.into(),
        }
    }

    pub fn failed(error: impl Into<anyhow::Error>) -> Self {
        Self {
            kind: ErrorKind::Failed,
            error: error.into(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self.kind {
            ErrorKind::Input => EXIT_INPUT,
            ErrorKind::Failed => EXIT_FAILED,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:#}", self.error)
    }
}

impl std::error::Error for CliError {}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        match e {
            ConfigError::Model(inner) => inner.into(),
            other => Self::input(other),
        }
    }
}

impl From<dcj::Error> for CliError {
    fn from(e: dcj::Error) -> Self {
        use dcj::Error as E;
        match e {
            E::Diverged { .. }
            | E::Reducible { .. }
            | E::MissingReverse { .. }
            | E::AbsorbingState { .. }
            | E::SolveFailed(_) => Self::failed(e),
            _ => Self::input(e),
        }
    }
}

impl From<anyhow::Error> for CliError {
    /// I/O while writing outputs.
    fn from(e: anyhow::Error) -> Self {
        Self::input(e)
    }
}

pub type CliResult<T> = Result<T, CliError>;

/// A loaded model with its provenance.
#[derive(Debug, Clone)]
pub struct Loaded {
    pub config: ModelConfig,
    pub spec: Spec,
    pub provenance: Provenance,
}

/// Read the config, apply command-line overrides and build the model.
pub fn load(opts: &Options) -> CliResult<Loaded> {
    let bytes = std::fs::read(&opts.config).map_err(|e| {
        CliError::input(ConfigError::Io {
            path: opts.config.display().to_string(),
            message: e.to_string(),
        })
    })?;
    let text = String::from_utf8(bytes.clone())
        .map_err(|e| CliError::input(anyhow::anyhow!("{} is not UTF-8: {e}", opts.config.display())))?;
    let mut config = ModelConfig::from_json(&text)?;
    if let Some(n) = opts.nmax {
        config.truncation.task_cap = Some(n);
    }
    if let Some(y) = opts.ymax {
        config.truncation.dc_cap = Some(y);
    }
    if let Some(tol) = opts.tol {
        config.tolerances.validation = Some(tol);
        config.tolerances.balance = Some(tol);
    }
    let spec = config.to_spec()?;
    let seed = opts.seed.or(config.seed).unwrap_or(0);
    let provenance = Provenance::new(&opts.config, &bytes, seed);
    Ok(Loaded {
        config,
        spec,
        provenance,
    })
}

/// Cap rayon's worker count from a `DCJ_THREADS` value.
pub fn init_threads(value: Option<&str>) -> CliResult<()> {
    let Some(value) = value else {
        return Ok(());
    };
    let threads: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::input(anyhow::anyhow!("DCJ_THREADS must be a positive integer, got `{value}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(CliError::input)
}

pub(crate) fn out_path(opts: &Options, name: &str) -> PathBuf {
    let dir: &Path = if opts.out.as_os_str().is_empty() {
        Path::new(".")
    } else {
        &opts.out
    };
    dir.join(name)
}

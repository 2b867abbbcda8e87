//! The `lw` command line: argument parsing, dispatch and exit codes.
//!
//! Exit codes: 0 when every verdict-bearing check passes, 1 when a check
//! fails (or a transform overflows its window), 2 for parse and validation
//! errors.

mod commands;
pub mod config;

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::Serialize;

use localwave::report::{CheckResult, SCHEMA_VERSION};

pub use config::RunConfig;
use config::{ModeArg, NuArg};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Core(#[from] localwave::Error),
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    /// A check failed before any output was produced.
    #[error("{0}")]
    Failed(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Failed(_) => 1,
            _ => 2,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "lw", version, about = "Discrete wavelet systems on Λ ⊂ GF(q)((p)): verification, transforms, symbols")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Run configuration (JSON).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub tolerance: Option<f64>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true, value_enum)]
    pub mode: Option<ModeArg>,
    #[arg(long, global = true, value_enum)]
    pub nu: Option<NuArg>,
    /// Write the main output here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Field and translation-set summary with the character basis diagnostic.
    FieldInfo,
    /// Orthonormality of the characters {χ_λ} on Ω.
    BasisCheck,
    /// Full check suite for a filter bank up to the given stage.
    Verify {
        #[arg(long)]
        bank: PathBuf,
        #[arg(long, default_value_t = 1)]
        stage: usize,
    },
    /// Decompose a signal (or reconstruct one with --inverse).
    Transform {
        #[arg(long)]
        bank: PathBuf,
        /// Signal taps, or a decomposition with --inverse.
        #[arg(long)]
        signal: PathBuf,
        #[arg(long, default_value_t = 1)]
        stage: usize,
        #[arg(long)]
        inverse: bool,
        /// Skip the orthonormality gate.
        #[arg(long)]
        force: bool,
    },
    /// Symbols of a bank, the recovered bank, and the cascade spectrum of m₀.
    Bridge {
        #[arg(long)]
        bank: PathBuf,
        #[arg(long, default_value_t = 8)]
        stage: usize,
    },
}

#[derive(Debug, Default, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

#[derive(Debug, Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub command: String,
    pub params: RunConfig,
    pub pass: bool,
    pub failing: Vec<String>,
    pub checks: Vec<CheckResult>,
    pub warnings: Vec<String>,
    #[serde(skip_serializing_if = "serde_json::Value::is_null")]
    pub data: serde_json::Value,
}

impl Report {
    pub fn new(command: &str, params: &RunConfig, checks: Vec<CheckResult>, warnings: Vec<String>, data: serde_json::Value) -> Self {
        let failing: Vec<String> = localwave::report::failing(&checks).into_iter().map(String::from).collect();
        Report {
            schema_version: SCHEMA_VERSION,
            command: command.to_string(),
            params: params.clone(),
            pass: failing.is_empty(),
            failing,
            checks,
            warnings,
            data,
        }
    }
}

pub(crate) fn read_file(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Io { path: path.display().to_string(), message: e.to_string() })
}

fn load_config(cli: &Cli) -> Result<RunConfig, CliError> {
    let path = cli.config.as_ref().ok_or_else(|| CliError::Usage("--config is required".into()))?;
    let mut cfg: RunConfig = localwave::io::parse(&read_file(path)?)?;
    if let Some(t) = cli.tolerance {
        cfg.tolerance = t;
    }
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(m) = cli.mode {
        cfg.cascade_mode = m.into();
    }
    if let Some(n) = cli.nu {
        cfg.params.nu_policy = Some(n.into());
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Parse and execute; never panics on bad input and never exits the process.
pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            return if code == 0 {
                Outcome { code, stdout: text, stderr: String::new() }
            } else {
                Outcome { code, stdout: String::new(), stderr: text }
            };
        }
    };
    match execute(&cli) {
        Ok(o) => o,
        Err(e) => Outcome { code: e.exit_code(), stdout: String::new(), stderr: format!("error: {e}\n") },
    }
}

fn execute(cli: &Cli) -> Result<Outcome, CliError> {
    let cfg = load_config(cli)?;
    let (main, side, code) = match &cli.command {
        Command::FieldInfo => commands::field_info(&cfg)?,
        Command::BasisCheck => commands::basis_check(&cfg)?,
        Command::Verify { bank, stage } => commands::verify(&cfg, bank, *stage)?,
        Command::Transform { bank, signal, stage, inverse, force } => {
            commands::transform(&cfg, bank, signal, *stage, *inverse, *force)?
        }
        Command::Bridge { bank, stage } => commands::bridge(&cfg, bank, *stage)?,
    };
    let mut out = Outcome { code, ..Default::default() };
    match &cli.out {
        Some(path) => {
            std::fs::write(path, &main).map_err(|e| CliError::Io { path: path.display().to_string(), message: e.to_string() })?;
            out.stdout = side;
        }
        None => {
            out.stdout = main;
            out.stderr = side;
        }
    }
    Ok(out)
}

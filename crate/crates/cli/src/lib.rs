//! Command-line driver for chair experiments: runs the experiment matrix
//! described by a TOML file, generates synthetic datasets, validates data
//! directories and merges result tables.

use std::path::{Path, PathBuf};

use thiserror::Error;

pub mod config;
mod output;
pub mod runner;

pub use config::Config;
pub use runner::{run_matrix, CellOutcome, MatrixOutcome};

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] amsa_core::Error),
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Usage(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Report(String),
    #[error("{count} finding(s) in {datasets} dataset(s)")]
    Findings { count: usize, datasets: usize },
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    /// Stable tag printed after `error:` on failure.
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Core(e) => e.kind(),
            CliError::Config(_) => "config",
            CliError::Usage(_) => "usage",
            CliError::Io { .. } => "io",
            CliError::Report(_) => "report",
            CliError::Findings { .. } => "validate",
        }
    }
}

macro_rules! core_from {
    ($($t:ty),*) => {$(
        impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                CliError::Core(e.into())
            }
        }
    )*};
}
core_from!(
    amsa_core::marketdata::DataError,
    amsa_core::metrics::MetricsError,
    amsa_core::amsa::AmsaError,
    amsa_core::agents::AgentError
);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Run,
    Datagen,
    Validate,
    Report,
}

/// One parsed command line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Invocation {
    pub command: Command,
    pub config: Option<PathBuf>,
    pub data_dir: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
}

impl Invocation {
    fn config(&self) -> Result<Config, CliError> {
        let mut cfg = match &self.config {
            Some(path) => Config::load(path)?,
            None => Config::default(),
        };
        if let Some(seed) = self.seed {
            cfg.experiment.seed = seed;
        }
        Ok(cfg)
    }

    fn out(&self) -> Result<&Path, CliError> {
        self.out
            .as_deref()
            .ok_or_else(|| CliError::Usage("--out is required for this command".into()))
    }

    fn data_dir(&self) -> Result<&Path, CliError> {
        let dir = self
            .data_dir
            .as_deref()
            .ok_or_else(|| CliError::Usage("--data-dir is required for this command".into()))?;
        if !dir.is_dir() {
            return Err(CliError::Usage(format!("{} is not a directory", dir.display())));
        }
        Ok(dir)
    }
}

/// Executes one invocation. Human-readable output goes to `stdout`.
pub fn run_cli(inv: &Invocation, stdout: &mut dyn std::io::Write) -> Result<(), CliError> {
    if let Some(path) = &inv.config {
        if !path.is_file() {
            return Err(CliError::Usage(format!("config file {} does not exist", path.display())));
        }
    }
    let echo = |out: &mut dyn std::io::Write, text: String| out.write_all(text.as_bytes()).map_err(|e| CliError::io(Path::new("<stdout>"), e));
    match inv.command {
        Command::Run => {
            let cfg = inv.config()?;
            let out = inv.out()?;
            let outcome = run_matrix(&cfg, inv.data_dir.as_deref(), out)?;
            echo(stdout, format!("{} cell(s) written to {}\n", outcome.cells.len(), out.display()))
        }
        Command::Datagen => {
            let cfg = inv.config()?;
            let out = inv.out()?;
            let written = runner::generate_markets(&cfg, out)?;
            echo(stdout, format!("{} dataset(s) written to {}\n", written.len(), out.display()))
        }
        Command::Validate => {
            let granularity = inv.config.as_ref().map(|_| inv.config()).transpose()?.map(|c| c.experiment.granularity);
            let reports = runner::validate_tree(inv.data_dir()?, granularity)?;
            let mut count = 0;
            for (name, report) in &reports {
                count += report.findings.len();
                echo(stdout, format!("== {name} ==\n{report}"))?;
            }
            if count > 0 {
                return Err(CliError::Findings {
                    count,
                    datasets: reports.len(),
                });
            }
            Ok(())
        }
        Command::Report => {
            let out = inv.out()?;
            let rows = runner::merge_reports(inv.data_dir()?, out)?;
            echo(stdout, format!("{rows} row(s) written to {}\n", out.display()))
        }
    }
}

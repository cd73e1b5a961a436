//! Command-line driver for the subgamma verification harness.

pub mod commands;
pub mod config;
pub mod document;

use std::path::{Path, PathBuf};
use std::time::Instant;

pub use config::JobConfig;
pub use document::{CheckRecord, Outcome, ReportDocument};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration: {0}")]
    Schema(String),
    #[error("computation failed: {0}")]
    Compute(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Schema(_) => 2,
            CliError::Compute(_) => 3,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    CertifyCd,
    HeatVerify,
    Spectral,
    Transport,
    Isoperimetry,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::CertifyCd => "certify-cd",
            Command::HeatVerify => "heat-verify",
            Command::Spectral => "spectral",
            Command::Transport => "transport",
            Command::Isoperimetry => "isoperimetry",
        }
    }
}

/// Settings from the command line that override the job file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub model: Option<String>,
    pub seed: Option<u64>,
    /// Certifier tolerance.
    pub tol: Option<f64>,
    /// Grid spacing.
    pub h: Option<f64>,
    pub out: Option<PathBuf>,
}

impl Overrides {
    pub fn apply(&self, mut config: JobConfig) -> JobConfig {
        if self.model.is_some() {
            config.model = self.model.clone();
        }
        if self.seed.is_some() {
            config.seed = self.seed;
        }
        if self.out.is_some() {
            config.out = self.out.clone();
        }
        config
    }
}

fn out_dir(config: &JobConfig) -> PathBuf {
    config.out.clone().unwrap_or_else(|| PathBuf::from("subgamma-out"))
}

/// Run one command and assemble its report. Nothing is written.
pub fn run(command: Command, config: &JobConfig, tol: Option<f64>, h: Option<f64>) -> Result<ReportDocument, CliError> {
    let start = Instant::now();
    let checks = match command {
        Command::CertifyCd => commands::certify_cd(config, tol)?,
        Command::HeatVerify => commands::heat_verify(config, h)?,
        Command::Spectral => commands::spectral(config, h)?,
        Command::Transport => commands::transport(config, h, &out_dir(config))?,
        Command::Isoperimetry => commands::isoperimetry(config, h)?,
    };
    Ok(ReportDocument::new(command.name(), config, checks, start.elapsed().as_secs_f64()))
}

/// Write `<command>.json` and `<command>.csv` into the output directory.
pub fn write_outputs(doc: &ReportDocument, dir: &Path) -> Result<(PathBuf, PathBuf), CliError> {
    let io = |e: std::io::Error| CliError::Compute(format!("writing to {}: {e}", dir.display()));
    std::fs::create_dir_all(dir).map_err(io)?;
    let json = dir.join(format!("{}.json", doc.command));
    std::fs::write(&json, doc.to_json()).map_err(io)?;
    let csv = dir.join(format!("{}.csv", doc.command));
    let file = std::fs::File::create(&csv).map_err(io)?;
    doc.write_csv(file).map_err(|e| CliError::Compute(e.to_string()))?;
    Ok((json, csv))
}

pub fn output_dir(config: &JobConfig) -> PathBuf {
    out_dir(config)
}

/// Read a stored report.
pub fn load_report(path: &Path) -> Result<ReportDocument, CliError> {
    let src = std::fs::read_to_string(path).map_err(|e| CliError::Schema(format!("reading {}: {e}", path.display())))?;
    serde_json::from_str(&src).map_err(|e| CliError::Schema(format!("{}: {e}", path.display())))
}

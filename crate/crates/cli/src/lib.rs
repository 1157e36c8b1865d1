//! Experiment driver for phaseless multi-frequency source reconstruction:
//! configuration, CSV and grid formats, and the stage runners behind the
//! `phaseless` binary.

pub mod config;
pub mod experiment;
pub mod formats;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration: {0}")]
    Config(String),
    #[error("determinant bound breached at k = {k}, sector {sector}: |det A| = {min_abs_det:e} < {bound:e}")]
    BoundBreach {
        k: f64,
        sector: usize,
        min_abs_det: f64,
        bound: f64,
    },
    #[error(transparent)]
    Core(#[from] phaseless_core::Error),
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("malformed input: {0}")]
    Format(String),
}

impl CliError {
    /// Process exit status: 2 for configuration problems, 3 for a breached
    /// determinant bound, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Core(phaseless_core::Error::Config(_)) => 2,
            CliError::BoundBreach { .. } => 3,
            _ => 1,
        }
    }

    pub fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.display().to_string(),
            source,
        }
    }
}

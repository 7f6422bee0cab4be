use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = PensError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum PensError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("non-finite value in {what} at flat index {index}")]
    NonFinite { what: String, index: usize },

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("time step {dt:e} exceeds the CFL limit {limit:e}")]
    CflViolation { dt: f64, limit: f64 },

    #[error("solution diverged at t = {t}, stage {stage}: {detail}")]
    Diverged { t: f64, stage: usize, detail: String },

    #[error("kinetic state lost {fraction:e} of its mass to the velocity boundary; increase the velocity cutoff")]
    VelocityBoundary { fraction: f64 },

    #[error("decay fit rejected: {0}")]
    Fit(String),

    #[error("configuration errors:\n{}", format_config_errors(.0))]
    Config(Vec<ConfigError>),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("snapshot rejected at byte offset {offset}: {detail}")]
    Snapshot { offset: usize, detail: String },
}

/// One problem found while parsing a configuration file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    /// 1-based line number, 0 when the problem is not tied to a line.
    pub line: usize,
    pub key: String,
    pub message: String,
}

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.line > 0 {
            write!(f, "line {}: {}: {}", self.line, self.key, self.message)
        } else {
            write!(f, "{}: {}", self.key, self.message)
        }
    }
}

fn format_config_errors(errors: &[ConfigError]) -> String {
    errors
        .iter()
        .map(|e| format!("  {e}"))
        .collect::<Vec<_>>()
        .join("\n")
}

impl PensError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        PensError::Io {
            path: path.into(),
            source,
        }
    }
}

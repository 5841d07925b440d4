use thiserror::Error;

use crate::plot::PlotError;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("{file}:{line}:{column}: at `{path}`: {message}")]
    Config { file: String, line: usize, column: usize, path: String, message: String },

    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Core(#[from] momentum_core::Error),

    #[error(transparent)]
    Plot(#[from] PlotError),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    /// Parse errors happen before any output directory exists.
    pub fn is_config_error(&self) -> bool {
        matches!(self, CliError::Config { .. } | CliError::Usage(_))
    }
}

use std::fmt;
use std::process::ExitCode;

use osf_core::io::IoError;
use osf_core::neural::NeuralError;
use osf_core::render::RenderError;

/// Failure classes with their process exit codes.
#[derive(Debug)]
pub enum CliError {
    /// Bad flags or flag combinations (exit 1).
    Usage(String),
    /// Unreadable, malformed or inconsistent input files (exit 2).
    Data(String),
    /// Divergence or non-finite values (exit 3).
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Numerical(_) => 3,
        })
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Data(m) => write!(f, "data error: {m}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
        }
    }
}

impl From<IoError> for CliError {
    fn from(e: IoError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<NeuralError> for CliError {
    fn from(e: NeuralError) -> Self {
        match e {
            NeuralError::Config(_) => CliError::Usage(e.to_string()),
            NeuralError::NonFinite(_) | NeuralError::Divergence { .. } => CliError::Numerical(e.to_string()),
            NeuralError::Checkpoint(_) | NeuralError::Io(_) => CliError::Data(e.to_string()),
        }
    }
}

impl From<RenderError> for CliError {
    fn from(e: RenderError) -> Self {
        match e {
            RenderError::Settings(_) => CliError::Usage(e.to_string()),
            RenderError::Camera(_) => CliError::Data(e.to_string()),
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

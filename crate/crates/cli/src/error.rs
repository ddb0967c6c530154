use std::path::Path;

use d2i_core::corpus::CorpusError;
use d2i_core::experiment::ExperimentError;
use d2i_core::glove::GloveError;
use d2i_core::nn::NnError;
use d2i_core::transform::TransformError;

/// Failure classes, each with its own exit status.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Bad flags or configuration (exit 1).
    #[error("{0}")]
    Usage(String),
    /// Unreadable, malformed or unusable input data (exit 2).
    #[error("{0}")]
    Data(String),
    /// Training blew up numerically (exit 3).
    #[error("{0}")]
    Divergence(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Divergence(_) => 3,
        }
    }

    pub fn io(path: &Path, e: std::io::Error) -> Self {
        CliError::Data(format!("{}: {e}", path.display()))
    }
}

impl From<NnError> for CliError {
    fn from(e: NnError) -> Self {
        match e {
            NnError::Divergence(_) => CliError::Divergence(e.to_string()),
            NnError::Config(_) => CliError::Usage(e.to_string()),
            _ => CliError::Data(e.to_string()),
        }
    }
}

impl From<ExperimentError> for CliError {
    fn from(e: ExperimentError) -> Self {
        match e {
            ExperimentError::Config(_) => CliError::Usage(e.to_string()),
            ExperimentError::Nn(inner) => inner.into(),
            _ => CliError::Data(e.to_string()),
        }
    }
}

impl From<CorpusError> for CliError {
    fn from(e: CorpusError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<TransformError> for CliError {
    fn from(e: TransformError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<GloveError> for CliError {
    fn from(e: GloveError) -> Self {
        match e {
            GloveError::Divergence { .. } => CliError::Divergence(e.to_string()),
            GloveError::Input(_) => CliError::Usage(e.to_string()),
            _ => CliError::Data(e.to_string()),
        }
    }
}

//! Error classification for the exit-code contract: 1 for validation
//! problems, 2 for I/O problems.

use std::fmt;

use suggestor_core::descriptor::DescriptorError;
use suggestor_core::simulation::SimulationError;
use suggestor_core::suggestion::SuggestionError;
use suggestor_core::tensor::TensorError;
use suggestor_core::uncertainty::UncertaintyError;

#[derive(Debug)]
pub enum CliError {
    Validation(String),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Io(_) => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Validation(message) => write!(f, "{message}"),
            CliError::Io(message) => write!(f, "{message}"),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(err: std::io::Error) -> Self {
        CliError::Io(err.to_string())
    }
}

impl From<TensorError> for CliError {
    fn from(err: TensorError) -> Self {
        match err {
            TensorError::Io(inner) => CliError::Io(inner.to_string()),
            other => CliError::Validation(other.to_string()),
        }
    }
}

impl From<DescriptorError> for CliError {
    fn from(err: DescriptorError) -> Self {
        CliError::Validation(err.to_string())
    }
}

impl From<UncertaintyError> for CliError {
    fn from(err: UncertaintyError) -> Self {
        CliError::Validation(err.to_string())
    }
}

impl From<SuggestionError> for CliError {
    fn from(err: SuggestionError) -> Self {
        CliError::Validation(err.to_string())
    }
}

impl From<SimulationError> for CliError {
    fn from(err: SimulationError) -> Self {
        CliError::Validation(err.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(err: serde_json::Error) -> Self {
        if err.is_io() {
            CliError::Io(err.to_string())
        } else {
            CliError::Validation(err.to_string())
        }
    }
}

use std::path::PathBuf;

use convmine::error::{ConformanceError, DiscoveryError, EvaluationError, IngestError, LogError, ModelError};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{} already exists (pass --force to overwrite)", .0.display())]
    WouldOverwrite(PathBuf),
    #[error("cannot write {}: {source}", path.display())]
    Write {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error(transparent)]
    Log(#[from] LogError),
    #[error(transparent)]
    Discovery(#[from] DiscoveryError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Conformance(#[from] ConformanceError),
    #[error(transparent)]
    Evaluation(#[from] EvaluationError),
}

impl CliError {
    /// 1 usage or configuration, 2 data, 3 model.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::WouldOverwrite(_) | CliError::Write { .. } => 1,
            CliError::Ingest(IngestError::Io { .. }) => 1,
            CliError::Ingest(_) | CliError::Log(_) | CliError::Discovery(_) => 2,
            CliError::Model(ModelError::InvalidParameter(_)) => 1,
            CliError::Model(_) => 3,
            CliError::Conformance(ConformanceError::InvalidCost(_)) => 1,
            CliError::Conformance(ConformanceError::EmptyLog) => 2,
            CliError::Conformance(_) => 3,
            CliError::Evaluation(EvaluationError::NoOverlap) => 2,
            CliError::Evaluation(_) => 1,
        }
    }
}

pub fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

use std::path::Path;

use geofeat_core::AnalysisError;

use crate::ingest::IngestError;
use crate::io::ArtifactError;

/// Command failures, grouped by exit status.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Data(String),
    #[error("internal error: {0}")]
    Internal(String),
}

impl CliError {
    pub const USAGE: i32 = 2;
    pub const DATA: i32 = 3;
    pub const INTERNAL: i32 = 4;

    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Usage(_) => Self::USAGE,
            Self::Data(_) => Self::DATA,
            Self::Internal(_) => Self::INTERNAL,
        }
    }

    pub fn ingest(path: &Path, e: IngestError) -> Self {
        Self::Data(format!("`{}` {e}", path.display()))
    }
}

impl From<ArtifactError> for CliError {
    fn from(e: ArtifactError) -> Self {
        Self::Data(e.to_string())
    }
}

impl From<AnalysisError> for CliError {
    fn from(e: AnalysisError) -> Self {
        Self::Data(e.to_string())
    }
}

use serde::Serialize;
use topocube_core::Error as CoreError;

/// Failure of a pipeline stage or request, with a stable machine code.
#[derive(Debug, thiserror::Error)]
pub enum ServiceError {
    /// Input files missing, unreadable or malformed.
    #[error("{0}")]
    Input(String),
    /// Flags or parameters out of contract.
    #[error("{0}")]
    Argument(String),
    /// Project state inconsistent with the request (missing stage, stale hash).
    #[error("{0}")]
    State(String),
    #[error("{0}")]
    NotFound(String),
    /// Threshold below the leaf level of the stored cubes.
    #[error("{0}")]
    Rebuild(String),
    #[error("{0}")]
    Oracle(String),
    #[error("{0}")]
    Internal(String),
}

pub type Result<T, E = ServiceError> = std::result::Result<T, E>;

#[derive(Debug, Serialize)]
pub struct ErrorBody {
    pub code: &'static str,
    pub message: String,
}

impl ServiceError {
    pub fn code(&self) -> &'static str {
        match self {
            ServiceError::Input(_) => "E_INPUT",
            ServiceError::Argument(_) => "E_ARGUMENT",
            ServiceError::State(_) => "E_STATE",
            ServiceError::NotFound(_) => "E_NOT_FOUND",
            ServiceError::Rebuild(_) => "E_REBUILD",
            ServiceError::Oracle(_) => "E_ORACLE",
            ServiceError::Internal(_) => "E_INTERNAL",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            ServiceError::Input(_) | ServiceError::Argument(_) => 2,
            ServiceError::State(_) | ServiceError::NotFound(_) | ServiceError::Rebuild(_) => 3,
            ServiceError::Oracle(_) => 4,
            ServiceError::Internal(_) => 1,
        }
    }

    pub fn body(&self) -> ErrorBody {
        ErrorBody {
            code: self.code(),
            message: self.to_string(),
        }
    }
}

impl From<CoreError> for ServiceError {
    fn from(e: CoreError) -> Self {
        let msg = e.to_string();
        match e {
            CoreError::MissingFile(_)
            | CoreError::Io(_)
            | CoreError::Csv(_)
            | CoreError::Schema(_)
            | CoreError::AllRowsRejected(_)
            | CoreError::Format { .. } => ServiceError::Input(msg),
            CoreError::InvalidArgument(_) | CoreError::KOutOfRange { .. } | CoreError::ThresholdMismatch { .. } => {
                ServiceError::Argument(msg)
            }
            CoreError::MissingPair(..) | CoreError::UnknownAxis(_) | CoreError::UnknownSegment(_) => {
                ServiceError::NotFound(msg)
            }
            CoreError::BelowLeafThreshold { .. } => ServiceError::Rebuild(msg),
            CoreError::CubeConfigMismatch => ServiceError::State(msg),
            CoreError::LinkCycle(_) => ServiceError::Internal(msg),
        }
    }
}

impl From<std::io::Error> for ServiceError {
    fn from(e: std::io::Error) -> Self {
        ServiceError::Input(e.to_string())
    }
}

impl From<serde_json::Error> for ServiceError {
    fn from(e: serde_json::Error) -> Self {
        ServiceError::Input(format!("invalid JSON: {e}"))
    }
}

//! Process-level error classification; each variant maps to one exit code.

use crate::graphio::GraphIoError;
use crate::ingest::IngestError;
use sispread_core::gen::GenError;
use sispread_core::si::SiError;

#[derive(Debug, thiserror::Error)]
pub enum AppError {
    /// Bad invocation or configuration (exit code 1).
    #[error("usage error: {0}")]
    Usage(String),
    /// Malformed or inconsistent input data (exit code 2).
    #[error("data error: {0}")]
    Data(String),
    /// Failure while executing an otherwise valid request (exit code 3).
    #[error("runtime error: {0}")]
    Runtime(String),
}

impl AppError {
    pub fn exit_code(&self) -> i32 {
        match self {
            AppError::Usage(_) => 1,
            AppError::Data(_) => 2,
            AppError::Runtime(_) => 3,
        }
    }
}

impl From<IngestError> for AppError {
    fn from(e: IngestError) -> Self {
        match e {
            IngestError::Io(io) => AppError::Runtime(io.to_string()),
            IngestError::InvalidParams(msg) => AppError::Usage(msg),
            other => AppError::Data(other.to_string()),
        }
    }
}

impl From<GraphIoError> for AppError {
    fn from(e: GraphIoError) -> Self {
        match e {
            GraphIoError::Io(io) => AppError::Runtime(io.to_string()),
            other => AppError::Data(other.to_string()),
        }
    }
}

impl From<GenError> for AppError {
    fn from(e: GenError) -> Self {
        AppError::Usage(e.to_string())
    }
}

impl From<SiError> for AppError {
    fn from(e: SiError) -> Self {
        AppError::Runtime(e.to_string())
    }
}

impl From<std::io::Error> for AppError {
    fn from(e: std::io::Error) -> Self {
        AppError::Runtime(e.to_string())
    }
}

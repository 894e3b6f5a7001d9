use std::io;

use lakeland_core::api::ErrorBody;
use lakeland_core::registry::RegistryError;
use thiserror::Error;

use crate::log::CorruptLog;

#[derive(Debug, Error)]
pub enum ServiceError {
    #[error(transparent)]
    Registry(#[from] RegistryError),
    /// A path segment that is not even a well-formed class code.
    #[error("unknown class {0:?}")]
    UnknownClassCode(String),
    #[error("sequence gap: acked through seq {last_seq}, batch continues at seq {got}")]
    SequenceGap { last_seq: u64, got: u64 },
    #[error("{0}")]
    Malformed(String),
    #[error("event log write failed: {0}")]
    Storage(#[from] io::Error),
    #[error("data directory {path} is not writable: {source}")]
    DataDirUnwritable { path: String, source: io::Error },
    #[error(transparent)]
    CorruptLog(#[from] CorruptLog),
}

impl ServiceError {
    /// Stable machine-readable error name.
    pub fn code(&self) -> &'static str {
        match self {
            ServiceError::Registry(e) => match e {
                RegistryError::Exhausted => "EXHAUSTED",
                RegistryError::UnknownClass(_) => "UNKNOWN_CLASS",
                RegistryError::DuplicateName(_) => "DUPLICATE_NAME",
                RegistryError::InvalidName => "INVALID_NAME",
                RegistryError::NotRegistered(_) => "NOT_REGISTERED",
                RegistryError::DuplicateClass(_) | RegistryError::DuplicateSession(_) => "CONFLICT",
            },
            ServiceError::UnknownClassCode(_) => "UNKNOWN_CLASS",
            ServiceError::SequenceGap { .. } => "SEQUENCE_GAP",
            ServiceError::Malformed(_) => "MALFORMED",
            ServiceError::Storage(_) => "STORAGE",
            ServiceError::DataDirUnwritable { .. } => "DATA_DIR_UNWRITABLE",
            ServiceError::CorruptLog(_) => "CORRUPT_LOG",
        }
    }

    pub fn body(&self) -> ErrorBody {
        ErrorBody {
            error: self.code().to_owned(),
            message: self.to_string(),
            last_seq: match self {
                ServiceError::SequenceGap { last_seq, .. } => Some(*last_seq),
                _ => None,
            },
        }
    }
}

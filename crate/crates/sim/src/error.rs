use thiserror::Error;

use crate::config::ConfigError;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("bad lake layout: {0}")]
    BadLayout(String),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("bad policy mix: {0}")]
    PolicyMix(String),
    #[error("sink unreachable: {0}")]
    SinkUnreachable(String),
    #[error("sink rejected request: {0}")]
    SinkRejected(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),
}

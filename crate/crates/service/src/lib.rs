//! The classroom telemetry service: ingestion into an append-only log,
//! replay on startup, and the polling dashboard API.

pub mod clock;
pub mod error;
pub mod http;
pub mod log;
pub mod server;
pub mod service;

pub use clock::{Clock, ManualClock, SystemClock};
pub use error::ServiceError;
pub use log::{replay, replay_file, CorruptLog, EventLog, LogRecord, Replay, ServiceState, LOG_FILE_NAME};
pub use service::{ServiceConfig, StartupReport, TelemetryService};

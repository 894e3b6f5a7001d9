//! JSON bodies of the telemetry service's HTTP interface, shared by the
//! server and its clients.

use serde::{Deserialize, Serialize};

use crate::features::ModelSnapshot;
use crate::ids::{ClassCode, SessionId};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CreateClassResponse {
    pub code: ClassCode,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegisterRequest {
    pub name: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegisterResponse {
    pub session_id: SessionId,
    pub play_url: String,
}

/// Events stay raw JSON here so the server can report per-event decode errors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IngestRequest {
    pub session_id: SessionId,
    pub events: Vec<serde_json::Value>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestAck {
    pub session_id: SessionId,
    pub last_seq: u64,
}

/// Body of every non-2xx response. `last_seq` is set for SEQUENCE_GAP so
/// clients can resume from the acked position.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub error: String,
    pub message: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub last_seq: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlayerPanel {
    pub display_name: String,
    pub session_id: SessionId,
    /// Highest sequence number reflected in `snapshot`; 0 before any event.
    pub last_seq: u64,
    pub snapshot: ModelSnapshot,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassDashboard {
    pub code: ClassCode,
    pub generated_at: u64,
    pub poll_hint_s: u64,
    /// Roster order.
    pub players: Vec<PlayerPanel>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Health {
    pub status: String,
    pub events: u64,
}

//! Line-delimited JSON wire format for [`GameEvent`].
//!
//! One event per line, keys in the order `session_id, seq, t_ms, kind,
//! payload`, payload keys in declaration order. Encoding is
//! byte-deterministic so logs can be diffed and replayed.

use serde::de::DeserializeOwned;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::Value;
use thiserror::Error;

use crate::event::{EventKind, GameEvent, Payload, Produce, Track, MAX_ACHIEVEMENT_TIER, TUTORIAL_COUNT};
use crate::grid::{TileGrid, TileKind};
use crate::ids::SessionId;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CodecError {
    #[error("malformed event: {0}")]
    Malformed(String),
    #[error("unknown event kind {0:?}")]
    UnknownKind(String),
    #[error("event violates an invariant: {0}")]
    InvariantViolation(String),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEvent {
    session_id: String,
    seq: u64,
    t_ms: u64,
    kind: String,
    #[serde(default)]
    payload: Value,
}

#[derive(Serialize)]
struct WireEvent<'a> {
    session_id: &'a SessionId,
    seq: u64,
    t_ms: u64,
    kind: &'static str,
    payload: &'a Payload,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct GridBody {
    grid: TileGrid,
}
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TutorialBody {
    tutorial_id: u8,
}
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct BuildBody {
    building: TileKind,
    x: u32,
    y: u32,
}
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SellBody {
    produce: Produce,
    amount: u64,
    money: u64,
}
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CellBody {
    x: u32,
    y: u32,
}
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CountBody {
    count: u64,
}
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct AchievementBody {
    track: Track,
    tier: u8,
}
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct EmptyBody {}

fn body<T: DeserializeOwned>(kind: EventKind, payload: Value) -> Result<T, CodecError> {
    // A missing payload is only acceptable for kinds with an empty body.
    let payload = if payload.is_null() {
        Value::Object(Default::default())
    } else {
        payload
    };
    serde_json::from_value(payload).map_err(|e| CodecError::Malformed(format!("{kind} payload: {e}")))
}

/// Parses one wire line into a validated event.
pub fn decode_event(line: &str) -> Result<GameEvent, CodecError> {
    let value: Value =
        serde_json::from_str(line.trim_end_matches(['\r', '\n'])).map_err(|e| CodecError::Malformed(e.to_string()))?;
    decode_value(value)
}

/// Like [`decode_event`] for an already-parsed JSON value.
pub fn decode_value(value: Value) -> Result<GameEvent, CodecError> {
    let raw: RawEvent = serde_json::from_value(value).map_err(|e| CodecError::Malformed(e.to_string()))?;
    let kind: EventKind = raw
        .kind
        .parse()
        .map_err(|_| CodecError::UnknownKind(raw.kind.clone()))?;
    let session_id = SessionId::parse(&raw.session_id).map_err(|e| CodecError::InvariantViolation(e.to_string()))?;

    let payload = match kind {
        EventKind::SessionStart => {
            let b: GridBody = body(kind, raw.payload)?;
            Payload::SessionStart { grid: b.grid }
        }
        EventKind::TutorialComplete => {
            let b: TutorialBody = body(kind, raw.payload)?;
            Payload::TutorialComplete {
                tutorial_id: b.tutorial_id,
            }
        }
        EventKind::Build => {
            let b: BuildBody = body(kind, raw.payload)?;
            Payload::Build {
                building: b.building,
                x: b.x,
                y: b.y,
            }
        }
        EventKind::Sell => {
            let b: SellBody = body(kind, raw.payload)?;
            Payload::Sell {
                produce: b.produce,
                amount: b.amount,
                money: b.money,
            }
        }
        EventKind::Fertilize => {
            let b: CellBody = body(kind, raw.payload)?;
            Payload::Fertilize { x: b.x, y: b.y }
        }
        EventKind::TileInspect => {
            let b: CellBody = body(kind, raw.payload)?;
            Payload::TileInspect { x: b.x, y: b.y }
        }
        EventKind::FarmerDeath => {
            let b: CountBody = body(kind, raw.payload)?;
            Payload::FarmerDeath { count: b.count }
        }
        EventKind::Population => {
            let b: CountBody = body(kind, raw.payload)?;
            Payload::Population { count: b.count }
        }
        EventKind::Achievement => {
            let b: AchievementBody = body(kind, raw.payload)?;
            Payload::Achievement {
                track: b.track,
                tier: b.tier,
            }
        }
        EventKind::Bloom => {
            let b: CellBody = body(kind, raw.payload)?;
            Payload::Bloom { x: b.x, y: b.y }
        }
        EventKind::BloomClear => {
            let b: CellBody = body(kind, raw.payload)?;
            Payload::BloomClear { x: b.x, y: b.y }
        }
        EventKind::Input => {
            let EmptyBody {} = body(kind, raw.payload)?;
            Payload::Input {}
        }
    };

    let event = GameEvent {
        session_id,
        seq: raw.seq,
        t_ms: raw.t_ms,
        payload,
    };
    validate(&event)?;
    Ok(event)
}

/// Checks the per-event invariants that do not depend on session history.
pub fn validate(event: &GameEvent) -> Result<(), CodecError> {
    let violation = |msg: String| Err(CodecError::InvariantViolation(msg));
    if event.seq == 0 {
        return violation("seq must start at 1".into());
    }
    let is_start = event.kind() == EventKind::SessionStart;
    if is_start != (event.seq == 1) {
        return violation(format!(
            "SESSION_START must occur exactly at seq 1 (got {} at seq {})",
            event.kind(),
            event.seq
        ));
    }
    match &event.payload {
        Payload::TutorialComplete { tutorial_id } if *tutorial_id >= TUTORIAL_COUNT => {
            violation(format!("tutorial_id {tutorial_id} outside 0..{TUTORIAL_COUNT}"))
        }
        Payload::Build { building, .. } if !building.is_building() => {
            violation(format!("BUILD of non-building tile {building:?}"))
        }
        Payload::Achievement { tier, .. } if !(1..=MAX_ACHIEVEMENT_TIER).contains(tier) => {
            violation(format!("achievement tier {tier} outside 1..={MAX_ACHIEVEMENT_TIER}"))
        }
        _ => Ok(()),
    }
}

/// Encodes `event` as one canonical wire line, without a trailing newline.
pub fn encode_event(event: &GameEvent) -> String {
    serde_json::to_string(&wire(event)).expect("event serialization is infallible")
}

fn wire(event: &GameEvent) -> WireEvent<'_> {
    WireEvent {
        session_id: &event.session_id,
        seq: event.seq,
        t_ms: event.t_ms,
        kind: event.kind().wire_name(),
        payload: &event.payload,
    }
}

impl Serialize for GameEvent {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        wire(self).serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for GameEvent {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let value = Value::deserialize(deserializer)?;
        decode_value(value).map_err(serde::de::Error::custom)
    }
}

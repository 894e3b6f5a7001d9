//! Shared vocabulary and computation for live classroom game telemetry:
//! the event schema and its wire codec, the farm grid, the dashboard
//! models, and the class registry.

pub mod api;
pub mod codec;
pub mod event;
pub mod features;
pub mod grid;
pub mod ids;
pub mod par;
pub mod registry;

pub use codec::{decode_event, decode_value, encode_event, CodecError};
pub use event::{EventKind, GameEvent, Payload, Produce, Track, TUTORIAL_COUNT};
pub use grid::{apply_grid_event, GridError, TileGrid, TileKind, MAX_GRID_SIDE};
pub use ids::{ClassCode, IdError, SessionId};

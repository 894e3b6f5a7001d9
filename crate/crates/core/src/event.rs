//! Gameplay events as sent by game clients.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::grid::{TileGrid, TileKind};
use crate::ids::SessionId;

/// Number of in-game tutorials; tutorial ids run `0..TUTORIAL_COUNT`.
pub const TUTORIAL_COUNT: u8 = 6;
pub const MAX_ACHIEVEMENT_TIER: u8 = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EventKind {
    SessionStart,
    TutorialComplete,
    Build,
    Sell,
    Fertilize,
    TileInspect,
    FarmerDeath,
    Population,
    Achievement,
    Bloom,
    BloomClear,
    Input,
}

impl EventKind {
    pub const ALL: [EventKind; 12] = [
        EventKind::SessionStart,
        EventKind::TutorialComplete,
        EventKind::Build,
        EventKind::Sell,
        EventKind::Fertilize,
        EventKind::TileInspect,
        EventKind::FarmerDeath,
        EventKind::Population,
        EventKind::Achievement,
        EventKind::Bloom,
        EventKind::BloomClear,
        EventKind::Input,
    ];

    pub fn wire_name(self) -> &'static str {
        match self {
            EventKind::SessionStart => "SESSION_START",
            EventKind::TutorialComplete => "TUTORIAL_COMPLETE",
            EventKind::Build => "BUILD",
            EventKind::Sell => "SELL",
            EventKind::Fertilize => "FERTILIZE",
            EventKind::TileInspect => "TILE_INSPECT",
            EventKind::FarmerDeath => "FARMER_DEATH",
            EventKind::Population => "POPULATION",
            EventKind::Achievement => "ACHIEVEMENT",
            EventKind::Bloom => "BLOOM",
            EventKind::BloomClear => "BLOOM_CLEAR",
            EventKind::Input => "INPUT",
        }
    }
}

impl fmt::Display for EventKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.wire_name())
    }
}

impl FromStr for EventKind {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        EventKind::ALL.into_iter().find(|k| k.wire_name() == s).ok_or(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Produce {
    Corn,
    Milk,
}

/// Achievement tracks. Each has five tiers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Track {
    Tutorial,
    Money,
    Bloom,
    Farm,
    Population,
}

impl Track {
    pub const ALL: [Track; 5] = [
        Track::Tutorial,
        Track::Money,
        Track::Bloom,
        Track::Farm,
        Track::Population,
    ];
}

/// Kind-specific event body. Field order is the canonical wire order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
#[serde(untagged)]
pub enum Payload {
    SessionStart {
        grid: TileGrid,
    },
    TutorialComplete {
        tutorial_id: u8,
    },
    Build {
        building: TileKind,
        x: u32,
        y: u32,
    },
    Sell {
        produce: Produce,
        amount: u64,
        money: u64,
    },
    Fertilize {
        x: u32,
        y: u32,
    },
    TileInspect {
        x: u32,
        y: u32,
    },
    FarmerDeath {
        count: u64,
    },
    Population {
        count: u64,
    },
    Achievement {
        track: Track,
        tier: u8,
    },
    Bloom {
        x: u32,
        y: u32,
    },
    BloomClear {
        x: u32,
        y: u32,
    },
    /// Generic interaction heartbeat.
    Input {},
}

impl Payload {
    pub fn kind(&self) -> EventKind {
        match self {
            Payload::SessionStart { .. } => EventKind::SessionStart,
            Payload::TutorialComplete { .. } => EventKind::TutorialComplete,
            Payload::Build { .. } => EventKind::Build,
            Payload::Sell { .. } => EventKind::Sell,
            Payload::Fertilize { .. } => EventKind::Fertilize,
            Payload::TileInspect { .. } => EventKind::TileInspect,
            Payload::FarmerDeath { .. } => EventKind::FarmerDeath,
            Payload::Population { .. } => EventKind::Population,
            Payload::Achievement { .. } => EventKind::Achievement,
            Payload::Bloom { .. } => EventKind::Bloom,
            Payload::BloomClear { .. } => EventKind::BloomClear,
            Payload::Input {} => EventKind::Input,
        }
    }
}

/// One timestamped, sequence-numbered gameplay action.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GameEvent {
    pub session_id: SessionId,
    /// Starts at 1 and increases by one per event within a session.
    pub seq: u64,
    /// Client clock, milliseconds since session start.
    pub t_ms: u64,
    pub payload: Payload,
}

impl GameEvent {
    pub fn kind(&self) -> EventKind {
        self.payload.kind()
    }
}

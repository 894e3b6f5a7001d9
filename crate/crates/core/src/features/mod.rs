//! Deterministic computation of the per-player dashboard models from a
//! session's event fold and its class.

pub mod accumulator;
pub mod catalog;
pub mod map;
pub mod percentile;
pub mod runoff;
pub mod snapshot;

pub use accumulator::{ApplyError, SessionAccumulator};
pub use catalog::{Category, ModelInfo, Visualization, MODEL_CATALOG};
pub use map::{render_map_summary, MapSummary, PALETTE_VERSION};
pub use percentile::{midrank, percentile_rank, MidRank, PercentileError, SortedClass};
pub use runoff::{detect_diagonal_strategy, nearest_water, runoff_direction, DiagonalStep, NoLake, RunoffField};
pub use snapshot::{
    format_playing_time, snapshot, snapshot_class, snapshot_class_sequential, BloomOrientation, ClassBaseline,
    IndicatorConfig, ModelConfig, ModelSnapshot, RankTrack, TownComposition,
};

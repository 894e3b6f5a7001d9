//! The sixteen per-player dashboard models.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::features::accumulator::SessionAccumulator;
use crate::features::map::{render_map_summary, MapSummary};
use crate::features::percentile::{MidRank, PercentileError, SortedClass};
use crate::features::runoff::detect_diagonal_strategy;
use crate::grid::{TileGrid, TileKind};
use crate::par;

/// Inactivity thresholds in seconds. An indicator fires once the time
/// since the matching activity is strictly greater than its threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndicatorConfig {
    pub active_s: u64,
    pub building_s: u64,
    pub sale_s: u64,
    pub explore_s: u64,
}

impl Default for IndicatorConfig {
    fn default() -> Self {
        Self {
            active_s: 60,
            building_s: 120,
            sale_s: 180,
            explore_s: 120,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("indicator threshold {0} must be strictly positive")]
pub struct InvalidThreshold(pub &'static str);

impl IndicatorConfig {
    pub fn validate(&self) -> Result<(), InvalidThreshold> {
        for (name, v) in [
            ("active_s", self.active_s),
            ("building_s", self.building_s),
            ("sale_s", self.sale_s),
            ("explore_s", self.explore_s),
        ] {
            if v == 0 {
                return Err(InvalidThreshold(name));
            }
        }
        Ok(())
    }
}

/// Which bloom count ranks higher in the bloom achievement percentile.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BloomOrientation {
    #[default]
    MoreIsHigher,
    FewerIsHigher,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ModelConfig {
    pub indicators: IndicatorConfig,
    pub bloom_orientation: BloomOrientation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct TownComposition {
    pub houses: u64,
    pub corn_fields: u64,
    pub dairy_farms: u64,
}

impl TownComposition {
    pub fn scan(grid: &TileGrid) -> Self {
        let mut town = Self::default();
        for kind in grid.tiles() {
            match kind {
                TileKind::House => town.houses += 1,
                TileKind::CornField => town.corn_fields += 1,
                TileKind::DairyFarm => town.dairy_farms += 1,
                _ => {}
            }
        }
        town
    }
}

/// One player's dashboard panel. Field order is the payload order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSnapshot {
    pub tutorials_completed: u64,
    pub rank_tutorial: f64,
    pub rank_money: f64,
    pub rank_bloom: f64,
    pub rank_farm: f64,
    pub rank_population: f64,
    pub playing_time: String,
    pub population: u64,
    pub map_summary: MapSummary,
    pub town_composition: TownComposition,
    pub diagonal_strategy: bool,
    pub idle_active: bool,
    pub idle_building: bool,
    pub idle_sale: bool,
    pub idle_explore: bool,
    pub farmer_deaths: u64,
}

/// `M:SS`, floored to whole seconds, minutes unbounded.
pub fn format_playing_time(elapsed_ms: u64) -> String {
    let secs = elapsed_ms / 1000;
    format!("{}:{:02}", secs / 60, secs % 60)
}

/// Ranked tracks, in payload order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RankTrack {
    Tutorial,
    Money,
    Bloom,
    Farm,
    Population,
}

impl RankTrack {
    pub const ALL: [RankTrack; 5] = [
        RankTrack::Tutorial,
        RankTrack::Money,
        RankTrack::Bloom,
        RankTrack::Farm,
        RankTrack::Population,
    ];

    /// The raw value ranked for this track. Not-started sessions rank with 0.
    pub fn value(self, acc: &SessionAccumulator, orientation: BloomOrientation) -> i128 {
        match self {
            RankTrack::Tutorial => acc.tutorials_completed() as i128,
            RankTrack::Money => acc.money_earned_total as i128,
            RankTrack::Bloom => match orientation {
                BloomOrientation::MoreIsHigher => acc.blooms_total as i128,
                BloomOrientation::FewerIsHigher => -(acc.blooms_total as i128),
            },
            RankTrack::Farm => acc.fields_built_total as i128,
            RankTrack::Population => acc.population as i128,
        }
    }
}

/// The class value multisets every snapshot in one dashboard ranks against.
#[derive(Debug, Clone)]
pub struct ClassBaseline {
    orientation: BloomOrientation,
    tracks: [SortedClass<i128>; 5],
}

impl ClassBaseline {
    pub fn new<'a, I>(class_accs: I, orientation: BloomOrientation) -> Self
    where
        I: IntoIterator<Item = &'a SessionAccumulator>,
        I::IntoIter: Clone,
    {
        let iter = class_accs.into_iter();
        let tracks =
            RankTrack::ALL.map(|track| SortedClass::new(iter.clone().map(|a| track.value(a, orientation)).collect()));
        Self { orientation, tracks }
    }

    pub fn midrank(&self, track: RankTrack, acc: &SessionAccumulator) -> Result<MidRank, PercentileError> {
        let i = RankTrack::ALL.iter().position(|t| *t == track).expect("track listed");
        self.tracks[i].midrank(&track.value(acc, self.orientation))
    }

    pub fn snapshot(
        &self,
        acc: &SessionAccumulator,
        now: u64,
        indicators: &IndicatorConfig,
    ) -> Result<ModelSnapshot, PercentileError> {
        let rank = |track| self.midrank(track, acc).map(|r| r.percentile());
        let (rank_tutorial, rank_money, rank_bloom, rank_farm, rank_population) = (
            rank(RankTrack::Tutorial)?,
            rank(RankTrack::Money)?,
            rank(RankTrack::Bloom)?,
            rank(RankTrack::Farm)?,
            rank(RankTrack::Population)?,
        );

        if !acc.is_started() {
            return Ok(ModelSnapshot {
                tutorials_completed: 0,
                rank_tutorial,
                rank_money,
                rank_bloom,
                rank_farm,
                rank_population,
                playing_time: format_playing_time(0),
                population: 0,
                map_summary: render_map_summary(&TileGrid::placeholder()),
                town_composition: TownComposition::default(),
                diagonal_strategy: false,
                idle_active: false,
                idle_building: false,
                idle_sale: false,
                idle_explore: false,
                farmer_deaths: 0,
            });
        }

        let idle = |last_at: u64, threshold_s: u64| now.saturating_sub(last_at) > threshold_s * 1000;
        Ok(ModelSnapshot {
            tutorials_completed: acc.tutorials_completed(),
            rank_tutorial,
            rank_money,
            rank_bloom,
            rank_farm,
            rank_population,
            playing_time: format_playing_time(now.saturating_sub(acc.started_at)),
            population: acc.population,
            map_summary: render_map_summary(&acc.grid),
            town_composition: TownComposition::scan(&acc.grid),
            diagonal_strategy: detect_diagonal_strategy(&acc.grid),
            idle_active: idle(acc.last_input_at, indicators.active_s),
            idle_building: idle(acc.last_build_at, indicators.building_s),
            idle_sale: idle(acc.last_sale_at, indicators.sale_s),
            idle_explore: idle(acc.last_inspect_at, indicators.explore_s),
            farmer_deaths: acc.deaths_total,
        })
    }
}

/// Snapshot of `acc` ranked against `class_accs`, which must contain it.
pub fn snapshot(
    acc: &SessionAccumulator,
    now: u64,
    class_accs: &[SessionAccumulator],
    cfg: &ModelConfig,
) -> Result<ModelSnapshot, PercentileError> {
    ClassBaseline::new(class_accs, cfg.bloom_orientation).snapshot(acc, now, &cfg.indicators)
}

/// Snapshots for a whole class against one shared baseline, in input order.
pub fn snapshot_class(accs: &[SessionAccumulator], now: u64, cfg: &ModelConfig) -> Vec<ModelSnapshot> {
    let baseline = ClassBaseline::new(accs, cfg.bloom_orientation);
    par::map(accs, |acc| {
        baseline
            .snapshot(acc, now, &cfg.indicators)
            .expect("every member is in its own baseline")
    })
}

/// Same as [`snapshot_class`] but always on the calling thread.
pub fn snapshot_class_sequential(accs: &[SessionAccumulator], now: u64, cfg: &ModelConfig) -> Vec<ModelSnapshot> {
    let baseline = ClassBaseline::new(accs, cfg.bloom_orientation);
    accs.iter()
        .map(|acc| {
            baseline
                .snapshot(acc, now, &cfg.indicators)
                .expect("every member is in its own baseline")
        })
        .collect()
}

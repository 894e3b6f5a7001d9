use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BuildCosts {
    pub house: u64,
    pub corn: u64,
    pub dairy: u64,
}

/// Tunable world constants. All of them are calibration knobs for a
/// small stand-in world, not measurements of the real game.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub tick_s: f64,
    pub corn_growth_ticks: u64,
    pub corn_nutrient_per_harvest: f64,
    pub fertilizer_boost: f64,
    pub runoff_fraction_per_tick: f64,
    pub bloom_threshold: f64,
    pub bloom_clear_level: f64,
    pub corn_price: u64,
    pub milk_price: u64,
    pub food_per_harvest: u64,
    pub upkeep_food_per_farmer_per_10_ticks: u64,
    pub farmers_per_house: u64,
    pub build_costs: BuildCosts,
    /// Unit thresholds for tiers 1..=5 of every achievement track.
    pub achievement_tiers: [u64; 5],
    /// Starting nutrient level of land; runoff drains anything above it.
    pub land_nutrient: f64,
    pub water_nutrient: f64,
    /// Fraction of a lake cell's nutrients lost each tick.
    pub lake_decay_fraction_per_tick: f64,
    pub start_money: u64,
    pub start_food: u64,
    pub fertilizer_cost: u64,
    pub milk_per_dairy_per_cycle: u64,
    /// Pads every online tick with INPUT heartbeats up to this many events.
    pub min_events_per_tick: usize,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            tick_s: 1.0,
            corn_growth_ticks: 20,
            corn_nutrient_per_harvest: 0.25,
            fertilizer_boost: 0.5,
            runoff_fraction_per_tick: 0.05,
            bloom_threshold: 0.8,
            bloom_clear_level: 0.4,
            corn_price: 5,
            milk_price: 8,
            food_per_harvest: 2,
            upkeep_food_per_farmer_per_10_ticks: 1,
            farmers_per_house: 2,
            build_costs: BuildCosts {
                house: 40,
                corn: 20,
                dairy: 60,
            },
            achievement_tiers: [1, 2, 5, 10, 20],
            land_nutrient: 0.6,
            water_nutrient: 0.2,
            lake_decay_fraction_per_tick: 0.01,
            start_money: 120,
            start_food: 10,
            fertilizer_cost: 2,
            milk_per_dairy_per_cycle: 1,
            min_events_per_tick: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("invalid simulation config: {0}")]
pub struct ConfigError(pub String);

impl SimConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let fractions = [
            ("corn_nutrient_per_harvest", self.corn_nutrient_per_harvest),
            ("fertilizer_boost", self.fertilizer_boost),
            ("runoff_fraction_per_tick", self.runoff_fraction_per_tick),
            ("bloom_threshold", self.bloom_threshold),
            ("bloom_clear_level", self.bloom_clear_level),
            ("land_nutrient", self.land_nutrient),
            ("water_nutrient", self.water_nutrient),
            ("lake_decay_fraction_per_tick", self.lake_decay_fraction_per_tick),
        ];
        for (name, v) in fractions {
            if !(v > 0.0 && v <= 1.0) {
                return Err(ConfigError(format!("{name} must be in (0, 1], got {v}")));
            }
        }
        if self.tick_s.is_nan() || self.tick_s <= 0.0 {
            return Err(ConfigError("tick_s must be positive".into()));
        }
        let counts = [
            ("corn_growth_ticks", self.corn_growth_ticks),
            ("corn_price", self.corn_price),
            ("milk_price", self.milk_price),
            ("food_per_harvest", self.food_per_harvest),
            (
                "upkeep_food_per_farmer_per_10_ticks",
                self.upkeep_food_per_farmer_per_10_ticks,
            ),
            ("farmers_per_house", self.farmers_per_house),
            ("build_costs.house", self.build_costs.house),
            ("build_costs.corn", self.build_costs.corn),
            ("build_costs.dairy", self.build_costs.dairy),
        ];
        for (name, v) in counts {
            if v == 0 {
                return Err(ConfigError(format!("{name} must be positive")));
            }
        }
        if self.bloom_clear_level >= self.bloom_threshold {
            return Err(ConfigError("bloom_clear_level must be below bloom_threshold".into()));
        }
        if self.achievement_tiers.windows(2).any(|w| w[0] >= w[1]) || self.achievement_tiers[0] == 0 {
            return Err(ConfigError("achievement tiers must be positive and increasing".into()));
        }
        Ok(())
    }

    pub fn tick_ms(&self, tick: u64) -> u64 {
        (tick as f64 * self.tick_s * 1000.0).round() as u64
    }
}

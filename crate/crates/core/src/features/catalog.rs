//! Names, categories and visualization kinds of the dashboard models,
//! keyed by their field in [`ModelSnapshot`](super::ModelSnapshot).

use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Category {
    Progress,
    #[serde(rename = "Game State")]
    GameState,
    Strategy,
    Indecision,
    Frustration,
    #[serde(rename = "Give Up")]
    GiveUp,
    Death,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Visualization {
    Number,
    Percentile,
    #[serde(rename = "Minutes:Seconds")]
    MinutesSeconds,
    #[serde(rename = "Icon + Number")]
    IconNumber,
    Bitmap,
    #[serde(rename = "Icons + Numbers")]
    IconsNumbers,
    #[serde(rename = "Binary Indicator")]
    BinaryIndicator,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ModelInfo {
    pub name: &'static str,
    pub category: Category,
    pub visualization: Visualization,
    pub field: &'static str,
}

const fn model(name: &'static str, category: Category, visualization: Visualization, field: &'static str) -> ModelInfo {
    ModelInfo {
        name,
        category,
        visualization,
        field,
    }
}

use Category::*;
use Visualization::*;

pub const MODEL_CATALOG: [ModelInfo; 16] = [
    model("Tutorials Completed", Progress, Number, "tutorials_completed"),
    model("Tutorial Achievement Rank", Progress, Percentile, "rank_tutorial"),
    model("Money Achievement Rank", Progress, Percentile, "rank_money"),
    model("Bloom Achievement Rank", Progress, Percentile, "rank_bloom"),
    model("Farm Achievement Rank", Progress, Percentile, "rank_farm"),
    model("Population Achievement Rank", Progress, Percentile, "rank_population"),
    model("Playing Time", GameState, MinutesSeconds, "playing_time"),
    model("Population", GameState, IconNumber, "population"),
    model("Map Summary", GameState, Bitmap, "map_summary"),
    model("Town Composition", Strategy, IconsNumbers, "town_composition"),
    model(
        "Diagonal Field Strategy Detector",
        Strategy,
        BinaryIndicator,
        "diagonal_strategy",
    ),
    model("Time Since Active", Indecision, BinaryIndicator, "idle_active"),
    model("Time Since Last Building", Indecision, BinaryIndicator, "idle_building"),
    model("Time Since Last Sale", Frustration, BinaryIndicator, "idle_sale"),
    model("Time Since Tile Exploration", GiveUp, BinaryIndicator, "idle_explore"),
    model("Farmer Deaths", Death, IconNumber, "farmer_deaths"),
];

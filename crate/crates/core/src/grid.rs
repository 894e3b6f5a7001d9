//! The player's farm map and the rules for mutating it from events.

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::event::{GameEvent, Payload};

pub const MAX_GRID_SIDE: u32 = 64;

/// Tile kinds with their wire palette index. The indices are a wire
/// contract and must never be renumbered.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[repr(u8)]
pub enum TileKind {
    LandEmpty = 0,
    Water = 1,
    WaterBloom = 2,
    House = 3,
    CornField = 4,
    DairyFarm = 5,
}

impl TileKind {
    pub const ALL: [TileKind; 6] = [
        TileKind::LandEmpty,
        TileKind::Water,
        TileKind::WaterBloom,
        TileKind::House,
        TileKind::CornField,
        TileKind::DairyFarm,
    ];

    pub fn palette_index(self) -> u8 {
        self as u8
    }

    pub fn from_palette_index(index: u8) -> Option<Self> {
        Self::ALL.get(index as usize).copied()
    }

    pub fn is_water(self) -> bool {
        matches!(self, TileKind::Water | TileKind::WaterBloom)
    }

    pub fn is_building(self) -> bool {
        matches!(self, TileKind::House | TileKind::CornField | TileKind::DairyFarm)
    }
}

impl Serialize for TileKind {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_u8(self.palette_index())
    }
}

impl<'de> Deserialize<'de> for TileKind {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let index = u8::deserialize(deserializer)?;
        TileKind::from_palette_index(index)
            .ok_or_else(|| serde::de::Error::custom(format!("unknown tile palette index {index}")))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GridError {
    #[error("grid dimensions {width}x{height} outside 1..={MAX_GRID_SIDE}")]
    BadDimensions { width: u32, height: u32 },
    #[error("grid has {actual} tiles, expected {expected}")]
    BadLength { expected: usize, actual: usize },
    #[error("cell ({x}, {y}) is outside the {width}x{height} grid")]
    OutOfBounds { x: u32, y: u32, width: u32, height: u32 },
    #[error("cannot place {what} on {found:?} at ({x}, {y})")]
    IllegalPlacement {
        what: &'static str,
        found: TileKind,
        x: u32,
        y: u32,
    },
}

/// Rectangular, row-major grid of tiles. Cell `(x, y)` is column `x` of row `y`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct TileGrid {
    width: u32,
    height: u32,
    tiles: Vec<TileKind>,
}

#[derive(Deserialize)]
struct RawGrid {
    width: u32,
    height: u32,
    tiles: Vec<TileKind>,
}

impl<'de> Deserialize<'de> for TileGrid {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = RawGrid::deserialize(deserializer)?;
        TileGrid::from_tiles(raw.width, raw.height, raw.tiles).map_err(serde::de::Error::custom)
    }
}

impl TileGrid {
    pub fn filled(width: u32, height: u32, kind: TileKind) -> Result<Self, GridError> {
        check_dimensions(width, height)?;
        Ok(Self {
            width,
            height,
            tiles: vec![kind; (width * height) as usize],
        })
    }

    pub fn from_tiles(width: u32, height: u32, tiles: Vec<TileKind>) -> Result<Self, GridError> {
        check_dimensions(width, height)?;
        let expected = (width * height) as usize;
        if tiles.len() != expected {
            return Err(GridError::BadLength {
                expected,
                actual: tiles.len(),
            });
        }
        Ok(Self { width, height, tiles })
    }

    /// The 1x1 all-land map shown for players who have not started.
    pub fn placeholder() -> Self {
        Self {
            width: 1,
            height: 1,
            tiles: vec![TileKind::LandEmpty],
        }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn tiles(&self) -> &[TileKind] {
        &self.tiles
    }

    pub fn in_bounds(&self, x: i64, y: i64) -> bool {
        x >= 0 && y >= 0 && x < self.width as i64 && y < self.height as i64
    }

    pub fn index(&self, x: u32, y: u32) -> Result<usize, GridError> {
        if x >= self.width || y >= self.height {
            return Err(GridError::OutOfBounds {
                x,
                y,
                width: self.width,
                height: self.height,
            });
        }
        Ok((y * self.width + x) as usize)
    }

    pub fn get(&self, x: u32, y: u32) -> Option<TileKind> {
        self.index(x, y).ok().map(|i| self.tiles[i])
    }

    /// Iterates `(x, y, kind)` in row-major order.
    pub fn cells(&self) -> impl Iterator<Item = (u32, u32, TileKind)> + '_ {
        let width = self.width;
        self.tiles
            .iter()
            .enumerate()
            .map(move |(i, kind)| (i as u32 % width, i as u32 / width, *kind))
    }

    pub fn count(&self, kind: TileKind) -> usize {
        self.tiles.iter().filter(|k| **k == kind).count()
    }

    pub fn build(&mut self, x: u32, y: u32, building: TileKind) -> Result<(), GridError> {
        let i = self.index(x, y)?;
        let found = self.tiles[i];
        if !building.is_building() {
            return Err(GridError::IllegalPlacement {
                what: "a non-building",
                found,
                x,
                y,
            });
        }
        if found != TileKind::LandEmpty {
            return Err(GridError::IllegalPlacement {
                what: "a building",
                found,
                x,
                y,
            });
        }
        self.tiles[i] = building;
        Ok(())
    }

    pub fn set_bloom(&mut self, x: u32, y: u32, bloom: bool) -> Result<(), GridError> {
        let i = self.index(x, y)?;
        let found = self.tiles[i];
        let (from, to, what) = if bloom {
            (TileKind::Water, TileKind::WaterBloom, "a bloom")
        } else {
            (TileKind::WaterBloom, TileKind::Water, "a bloom clear")
        };
        if found != from {
            return Err(GridError::IllegalPlacement { what, found, x, y });
        }
        self.tiles[i] = to;
        Ok(())
    }

    /// Applies the grid effect of `event` in place. Kinds without a grid
    /// effect leave the grid untouched.
    pub fn apply_event(&mut self, event: &GameEvent) -> Result<(), GridError> {
        match &event.payload {
            Payload::Build { building, x, y } => self.build(*x, *y, *building),
            Payload::Bloom { x, y } => self.set_bloom(*x, *y, true),
            Payload::BloomClear { x, y } => self.set_bloom(*x, *y, false),
            _ => Ok(()),
        }
    }
}

/// Returns `grid` with the effect of `event` applied. Fails without side
/// effects on out-of-bounds coordinates or illegal placements.
pub fn apply_grid_event(grid: &TileGrid, event: &GameEvent) -> Result<TileGrid, GridError> {
    let mut next = grid.clone();
    next.apply_event(event)?;
    Ok(next)
}

fn check_dimensions(width: u32, height: u32) -> Result<(), GridError> {
    if width == 0 || height == 0 || width > MAX_GRID_SIDE || height > MAX_GRID_SIDE {
        return Err(GridError::BadDimensions { width, height });
    }
    Ok(())
}

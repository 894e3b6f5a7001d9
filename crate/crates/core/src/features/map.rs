//! Palette bitmap rendering of the farm map.

use serde::{Deserialize, Serialize};

use crate::grid::{GridError, TileGrid, TileKind};

pub const PALETTE_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MapSummary {
    pub width: u32,
    pub height: u32,
    pub palette_version: u32,
    /// `rows[y][x]` is the palette index of tile `(x, y)`.
    pub rows: Vec<Vec<u8>>,
}

pub fn render_map_summary(grid: &TileGrid) -> MapSummary {
    MapSummary {
        width: grid.width(),
        height: grid.height(),
        palette_version: PALETTE_VERSION,
        rows: grid
            .tiles()
            .chunks(grid.width() as usize)
            .map(|row| row.iter().map(|k| k.palette_index()).collect())
            .collect(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MapDecodeError {
    #[error("unsupported palette version {0}")]
    PaletteVersion(u32),
    #[error("row {row} has {len} entries, expected {width}")]
    RowLength { row: usize, len: usize, width: u32 },
    #[error("unknown palette index {0}")]
    PaletteIndex(u8),
    #[error(transparent)]
    Grid(#[from] GridError),
}

impl MapSummary {
    /// Rebuilds the grid the bitmap was rendered from.
    pub fn to_grid(&self) -> Result<TileGrid, MapDecodeError> {
        if self.palette_version != PALETTE_VERSION {
            return Err(MapDecodeError::PaletteVersion(self.palette_version));
        }
        let mut tiles = Vec::with_capacity((self.width * self.height) as usize);
        for (row, cells) in self.rows.iter().enumerate() {
            if cells.len() != self.width as usize {
                return Err(MapDecodeError::RowLength {
                    row,
                    len: cells.len(),
                    width: self.width,
                });
            }
            for &index in cells {
                tiles.push(TileKind::from_palette_index(index).ok_or(MapDecodeError::PaletteIndex(index))?);
            }
        }
        Ok(TileGrid::from_tiles(self.width, self.height, tiles)?)
    }
}

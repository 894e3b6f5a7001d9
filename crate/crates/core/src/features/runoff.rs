//! Fertilizer runoff geometry and the diagonal field strategy detector.
//!
//! Runoff always moves one diagonal step toward the nearest water cell:
//! nearest by Chebyshev distance, ties to the smallest `(y, x)`, and an
//! axis with zero displacement is treated as `+1`.

use thiserror::Error;

use crate::grid::{TileGrid, TileKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("grid has no water cells")]
pub struct NoLake;

/// One diagonal step; both components are `-1` or `+1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct DiagonalStep {
    pub dx: i8,
    pub dy: i8,
}

impl DiagonalStep {
    /// The cell one step from `(x, y)`, if it lies inside `grid`.
    pub fn from_cell(self, grid: &TileGrid, x: u32, y: u32) -> Option<(u32, u32)> {
        let (nx, ny) = (x as i64 + self.dx as i64, y as i64 + self.dy as i64);
        grid.in_bounds(nx, ny).then_some((nx as u32, ny as u32))
    }
}

fn sign_or_up(delta: i64) -> i8 {
    if delta < 0 {
        -1
    } else {
        1
    }
}

/// Nearest water cell to `(x, y)`.
pub fn nearest_water(grid: &TileGrid, x: u32, y: u32) -> Result<(u32, u32), NoLake> {
    let mut best: Option<(i64, u32, u32)> = None;
    // Row-major iteration visits cells in ascending (y, x), so keeping the
    // first strict minimum implements the tie rule.
    for (wx, wy, kind) in grid.cells() {
        if !kind.is_water() {
            continue;
        }
        let d = (wx as i64 - x as i64).abs().max((wy as i64 - y as i64).abs());
        if best.is_none_or(|(bd, _, _)| d < bd) {
            best = Some((d, wx, wy));
        }
    }
    best.map(|(_, wx, wy)| (wx, wy)).ok_or(NoLake)
}

pub fn runoff_direction(grid: &TileGrid, x: u32, y: u32) -> Result<DiagonalStep, NoLake> {
    let (wx, wy) = nearest_water(grid, x, y)?;
    Ok(DiagonalStep {
        dx: sign_or_up(wx as i64 - x as i64),
        dy: sign_or_up(wy as i64 - y as i64),
    })
}

/// Runoff directions for every cell of a grid, computed once. Only the
/// water layout matters, so the field stays valid across builds and blooms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunoffField {
    width: u32,
    steps: Vec<DiagonalStep>,
}

impl RunoffField {
    pub fn compute(grid: &TileGrid) -> Result<Self, NoLake> {
        let water: Vec<(i64, i64)> = grid
            .cells()
            .filter(|(_, _, k)| k.is_water())
            .map(|(x, y, _)| (x as i64, y as i64))
            .collect();
        if water.is_empty() {
            return Err(NoLake);
        }
        let steps = grid
            .cells()
            .map(|(x, y, _)| {
                let (x, y) = (x as i64, y as i64);
                let mut best = (i64::MAX, 0, 0);
                for &(wx, wy) in &water {
                    let d = (wx - x).abs().max((wy - y).abs());
                    if d < best.0 {
                        best = (d, wx, wy);
                    }
                }
                DiagonalStep {
                    dx: sign_or_up(best.1 - x),
                    dy: sign_or_up(best.2 - y),
                }
            })
            .collect();
        Ok(Self {
            width: grid.width(),
            steps,
        })
    }

    pub fn step(&self, x: u32, y: u32) -> DiagonalStep {
        self.steps[(y * self.width + x) as usize]
    }
}

/// True when some corn field's runoff target is itself a corn field.
pub fn detect_diagonal_strategy(grid: &TileGrid) -> bool {
    let fields: Vec<(u32, u32)> = grid
        .cells()
        .filter(|(_, _, k)| *k == TileKind::CornField)
        .map(|(x, y, _)| (x, y))
        .collect();
    if fields.len() < 2 {
        return false;
    }
    fields.iter().any(|&(x, y)| {
        let Ok(step) = runoff_direction(grid, x, y) else {
            return false;
        };
        step.from_cell(grid, x, y).and_then(|(nx, ny)| grid.get(nx, ny)) == Some(TileKind::CornField)
    })
}

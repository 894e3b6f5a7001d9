//! Scripted bot players. Every choice a bot makes comes from the world
//! state and the world's seeded generator, so runs are reproducible.

use std::fmt;
use std::str::FromStr;

use lakeland_core::{GameEvent, Produce, TileKind, TUTORIAL_COUNT};
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::SimError;
use crate::world::WorldState;

/// Last tick of the tutorial phase; tutorial `i` completes on tick `2i + 1`.
pub const TUTORIAL_PHASE_END: u64 = 2 * TUTORIAL_COUNT as u64 - 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum BotPolicy {
    /// Chains corn fields along the runoff diagonal toward the lake and
    /// fertilizes generously.
    DiagonalFarmer,
    /// Row-major fields on every other row, so no field ever sits on
    /// another field's runoff diagonal.
    GridFarmer,
    /// Completes fewer than six tutorials, then goes silent.
    Idler,
    /// Plays like [`BotPolicy::Balanced`] for a while, then only sends heartbeats.
    Quitter,
    /// Mixed building, regular sales, fertilizes only when fields run low.
    Balanced,
}

impl BotPolicy {
    pub const ALL: [BotPolicy; 5] = [
        BotPolicy::DiagonalFarmer,
        BotPolicy::GridFarmer,
        BotPolicy::Idler,
        BotPolicy::Quitter,
        BotPolicy::Balanced,
    ];

    pub fn short_name(self) -> &'static str {
        match self {
            BotPolicy::DiagonalFarmer => "diagonal",
            BotPolicy::GridFarmer => "grid",
            BotPolicy::Idler => "idler",
            BotPolicy::Quitter => "quitter",
            BotPolicy::Balanced => "balanced",
        }
    }
}

impl fmt::Display for BotPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.short_name())
    }
}

impl FromStr for BotPolicy {
    type Err = SimError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        BotPolicy::ALL
            .into_iter()
            .find(|p| p.short_name() == s.trim().to_ascii_lowercase())
            .ok_or_else(|| SimError::PolicyMix(format!("unknown policy {s:?}")))
    }
}

/// Weighted policy assignment such as `balanced:10,diagonal:4`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolicyMix(pub Vec<(BotPolicy, usize)>);

impl Default for PolicyMix {
    fn default() -> Self {
        Self(vec![
            (BotPolicy::Balanced, 10),
            (BotPolicy::DiagonalFarmer, 4),
            (BotPolicy::GridFarmer, 3),
            (BotPolicy::Idler, 2),
            (BotPolicy::Quitter, 1),
        ])
    }
}

impl FromStr for PolicyMix {
    type Err = SimError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut parts = Vec::new();
        for item in s.split(',').filter(|p| !p.trim().is_empty()) {
            let (name, count) = item
                .split_once(':')
                .ok_or_else(|| SimError::PolicyMix(format!("expected name:count, got {item:?}")))?;
            let count: usize = count
                .trim()
                .parse()
                .map_err(|_| SimError::PolicyMix(format!("bad count in {item:?}")))?;
            parts.push((name.parse()?, count));
        }
        if parts.iter().all(|(_, c)| *c == 0) {
            return Err(SimError::PolicyMix("mix assigns no players".into()));
        }
        Ok(Self(parts))
    }
}

impl PolicyMix {
    /// Expands the mix in order, cycling when `n` exceeds its total.
    pub fn assign(&self, n: usize) -> Vec<BotPolicy> {
        let expanded: Vec<BotPolicy> = self.0.iter().flat_map(|&(p, c)| std::iter::repeat_n(p, c)).collect();
        expanded.iter().copied().cycle().take(n).collect()
    }
}

/// Per-tick chance that a playing bot works on its building plan.
const BUILD_CHANCE: f64 = 1.0 / 3.0;

const BALANCED_PLAN: [TileKind; 13] = [
    TileKind::House,
    TileKind::CornField,
    TileKind::CornField,
    TileKind::CornField,
    TileKind::DairyFarm,
    TileKind::CornField,
    TileKind::CornField,
    TileKind::House,
    TileKind::CornField,
    TileKind::CornField,
    TileKind::House,
    TileKind::CornField,
    TileKind::DairyFarm,
];

const GRID_PLAN: [TileKind; 12] = [
    TileKind::CornField,
    TileKind::CornField,
    TileKind::House,
    TileKind::CornField,
    TileKind::CornField,
    TileKind::DairyFarm,
    TileKind::CornField,
    TileKind::CornField,
    TileKind::House,
    TileKind::CornField,
    TileKind::CornField,
    TileKind::CornField,
];

const DIAGONAL_PLAN: [TileKind; 8] = [
    TileKind::House,
    TileKind::CornField,
    TileKind::DairyFarm,
    TileKind::CornField,
    TileKind::House,
    TileKind::CornField,
    TileKind::CornField,
    TileKind::House,
];

/// A policy plus the per-player parameters drawn for it at creation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bot {
    pub policy: BotPolicy,
    /// Tutorials this bot will complete (all six except for idlers).
    pub tutorials_planned: u8,
    /// Quitters stop playing after this tick.
    pub quit_after: u64,
    /// Diagonal farmers' planned field chain, lake-ward.
    pub chain: Vec<(u32, u32)>,
    plan_cursor: usize,
    next_inspect: u64,
}

impl Bot {
    pub fn new(policy: BotPolicy, world: &mut WorldState) -> Self {
        let tutorials_planned = match policy {
            BotPolicy::Idler => world.rng.random_range(0..TUTORIAL_COUNT),
            _ => TUTORIAL_COUNT,
        };
        let quit_after = match policy {
            BotPolicy::Quitter => world.rng.random_range(60..=200),
            _ => u64::MAX,
        };
        let chain = match policy {
            BotPolicy::DiagonalFarmer => pick_chain(world),
            _ => Vec::new(),
        };
        let next_inspect = TUTORIAL_PHASE_END + world.rng.random_range(1..=5);
        Self {
            policy,
            tutorials_planned,
            quit_after,
            chain,
            plan_cursor: 0,
            next_inspect,
        }
    }

    /// Whether the player's client is still sending anything at `tick`.
    pub fn is_online(&self, tick: u64) -> bool {
        match self.policy {
            BotPolicy::Idler => tick < 2 * self.tutorials_planned as u64,
            _ => true,
        }
    }

    /// Whether the player is still making game decisions at `tick`.
    pub fn is_playing(&self, tick: u64) -> bool {
        match self.policy {
            BotPolicy::Idler => false,
            BotPolicy::Quitter => tick <= self.quit_after,
            _ => true,
        }
    }

    /// Performs this tick's player actions.
    pub fn act(&mut self, world: &mut WorldState, out: &mut Vec<GameEvent>) {
        let tick = world.tick;
        if tick <= TUTORIAL_PHASE_END {
            if tick % 2 == 1 {
                let id = ((tick - 1) / 2) as u8;
                if id < self.tutorials_planned {
                    world.complete_tutorial(id, out);
                }
            }
            return;
        }
        if !self.is_playing(tick) {
            return;
        }
        match self.policy {
            BotPolicy::Balanced | BotPolicy::Quitter => {
                self.trade_and_explore(world, out);
                fertilize_low_field(world, 0.3, out);
                if world.rng.random_bool(BUILD_CHANCE) {
                    self.build_next(world, &BALANCED_PLAN, out, |w, _| random_land(w));
                }
            }
            BotPolicy::GridFarmer => {
                self.trade_and_explore(world, out);
                fertilize_low_field(world, 0.3, out);
                if world.rng.random_bool(BUILD_CHANCE) {
                    self.build_next(world, &GRID_PLAN, out, |w, kind| {
                        let want_even = kind == TileKind::CornField;
                        w.grid
                            .cells()
                            .find(|&(_, y, k)| k == TileKind::LandEmpty && (y % 2 == 0) == want_even)
                            .map(|(x, y, _)| (x, y))
                    });
                }
            }
            BotPolicy::DiagonalFarmer => {
                // The first two chain links go down right after the tutorials.
                if tick <= TUTORIAL_PHASE_END + 2 {
                    if let Some(&(x, y)) = self.chain.get((tick - TUTORIAL_PHASE_END - 1) as usize) {
                        world.build(TileKind::CornField, x, y, out);
                    }
                    return;
                }
                self.trade_and_explore(world, out);
                fertilize_low_field(world, 0.5, out);
                if world.rng.random_bool(BUILD_CHANCE) {
                    let chain = self.chain.clone();
                    self.build_next(world, &DIAGONAL_PLAN, out, move |w, kind| {
                        if kind == TileKind::CornField {
                            if let Some(&cell) = chain
                                .iter()
                                .find(|&&(x, y)| w.grid.get(x, y) == Some(TileKind::LandEmpty))
                            {
                                return Some(cell);
                            }
                        }
                        random_land(w)
                    });
                }
            }
            BotPolicy::Idler => {}
        }
    }

    fn trade_and_explore(&mut self, world: &mut WorldState, out: &mut Vec<GameEvent>) {
        let tick = world.tick;
        if tick.is_multiple_of(5) {
            let reserve = world.population * 2 + 4;
            if world.food > reserve {
                let surplus = world.food - reserve;
                world.sell(Produce::Corn, surplus, out);
            }
            if world.milk > 0 {
                let milk = world.milk;
                world.sell(Produce::Milk, milk, out);
            }
        }
        if tick >= self.next_inspect {
            let x = world.rng.random_range(0..world.grid.width());
            let y = world.rng.random_range(0..world.grid.height());
            world.inspect(x, y, out);
            self.next_inspect = tick + world.rng.random_range(4..=9);
        }
    }

    fn build_next(
        &mut self,
        world: &mut WorldState,
        plan: &[TileKind],
        out: &mut Vec<GameEvent>,
        place: impl Fn(&mut WorldState, TileKind) -> Option<(u32, u32)>,
    ) {
        let Some(&kind) = plan.get(self.plan_cursor) else {
            return;
        };
        // Keep a little cash for fertilizer.
        if world.money < world.build_cost(kind) + 10 {
            return;
        }
        // A house the corn cannot feed is dropped from the plan.
        if kind == TileKind::House && !world.can_feed(world.population + world.config.farmers_per_house) {
            self.plan_cursor += 1;
            return;
        }
        match place(world, kind) {
            Some((x, y)) if world.build(kind, x, y, out) => self.plan_cursor += 1,
            Some(_) => {}
            // Nowhere to put it; skip this plan step.
            None => self.plan_cursor += 1,
        }
    }
}

fn random_land(world: &mut WorldState) -> Option<(u32, u32)> {
    let land: Vec<(u32, u32)> = world
        .grid
        .cells()
        .filter(|(_, _, k)| *k == TileKind::LandEmpty)
        .map(|(x, y, _)| (x, y))
        .collect();
    if land.is_empty() {
        return None;
    }
    Some(land[world.rng.random_range(0..land.len())])
}

fn fertilize_low_field(world: &mut WorldState, below: f64, out: &mut Vec<GameEvent>) -> bool {
    let target = world
        .grid
        .cells()
        .find(|&(x, y, k)| k == TileKind::CornField && world.nutrient(x, y) < below)
        .map(|(x, y, _)| (x, y));
    match target {
        Some((x, y)) => world.fertilize(x, y, out),
        None => false,
    }
}

/// Finds a run of empty land cells where each cell's runoff step lands on
/// the next. Longer runs win; ties go to the generator's shuffle order.
fn pick_chain(world: &mut WorldState) -> Vec<(u32, u32)> {
    let mut starts: Vec<(u32, u32)> = world
        .grid
        .cells()
        .filter(|(_, _, k)| *k == TileKind::LandEmpty)
        .map(|(x, y, _)| (x, y))
        .collect();
    starts.shuffle(&mut world.rng);
    let mut best: Vec<(u32, u32)> = Vec::new();
    for start in starts {
        let mut chain = vec![start];
        let mut cell = start;
        while chain.len() < 4 {
            let step = world.runoff_field().step(cell.0, cell.1);
            match step.from_cell(&world.grid, cell.0, cell.1) {
                Some(next) if world.grid.get(next.0, next.1) == Some(TileKind::LandEmpty) => {
                    chain.push(next);
                    cell = next;
                }
                _ => break,
            }
        }
        if chain.len() > best.len() {
            best = chain;
            if best.len() == 4 {
                break;
            }
        }
    }
    best
}

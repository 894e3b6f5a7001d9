//! World state and the per-tick mechanics: building, fertilizer, harvests,
//! runoff, algae blooms, food upkeep and achievements.

use std::collections::BTreeSet;

use lakeland_core::features::RunoffField;
use lakeland_core::{GameEvent, Payload, Produce, SessionId, TileGrid, TileKind, Track, MAX_GRID_SIDE};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::config::SimConfig;
use crate::error::SimError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LakeLayout {
    Rect { x: u32, y: u32, width: u32, height: u32 },
    Cells(Vec<(u32, u32)>),
}

impl LakeLayout {
    fn cells(&self) -> Vec<(u32, u32)> {
        match self {
            LakeLayout::Rect { x, y, width, height } => (*y..y + height)
                .flat_map(|cy| (*x..x + width).map(move |cx| (cx, cy)))
                .collect(),
            LakeLayout::Cells(cells) => cells.clone(),
        }
    }
}

/// Nutrient bookkeeping for one tick. `before + fertilizer_added -
/// harvest_consumed - clamp_loss - lake_decay` must equal `after`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct MassBalance {
    pub before: f64,
    pub fertilizer_added: f64,
    pub harvest_consumed: f64,
    pub clamp_loss: f64,
    pub lake_decay: f64,
    pub after: f64,
}

impl MassBalance {
    pub fn residual(&self) -> f64 {
        self.before + self.fertilizer_added - self.harvest_consumed - self.clamp_loss - self.lake_decay - self.after
    }

    pub fn relative_error(&self) -> f64 {
        self.residual().abs() / self.before.abs().max(self.after.abs()).max(1.0)
    }
}

/// What the simulator knows happened, for checking detectors against.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct GroundTruth {
    pub tutorials: BTreeSet<u8>,
    pub deaths: u64,
    pub blooms: u64,
    pub fields_built: u64,
    pub money_earned: u64,
    /// First tick at which some field's runoff target was another field.
    pub diagonal_since_tick: Option<u64>,
}

#[derive(Debug, Clone)]
pub struct WorldState {
    pub config: SimConfig,
    pub session_id: SessionId,
    pub next_seq: u64,
    pub grid: TileGrid,
    pub nutrients: Vec<f64>,
    pub money: u64,
    pub food: u64,
    pub milk: u64,
    pub population: u64,
    pub tick: u64,
    pub blooms_active: BTreeSet<(u32, u32)>,
    pub achievements_awarded: BTreeSet<(Track, u8)>,
    pub rng: ChaCha8Rng,
    pub truth: GroundTruth,
    pub last_balance: MassBalance,
    /// Tick each building was placed, for production cycles.
    built_at: Vec<Option<u64>>,
    runoff: RunoffField,
    pending: MassBalance,
}

/// Creates a world and its SESSION_START event.
pub fn world_init(
    session_id: SessionId,
    width: u32,
    height: u32,
    lake_layout: &LakeLayout,
    seed: u64,
    config: &SimConfig,
) -> Result<(WorldState, GameEvent), SimError> {
    config.validate()?;
    if width == 0 || height == 0 || width > MAX_GRID_SIDE || height > MAX_GRID_SIDE {
        return Err(SimError::BadLayout(format!("dimensions {width}x{height}")));
    }
    let mut grid = TileGrid::filled(width, height, TileKind::LandEmpty).expect("dimensions checked");
    let mut tiles = grid.tiles().to_vec();
    let lake = lake_layout.cells();
    if lake.is_empty() {
        return Err(SimError::BadLayout("lake layout has no water cells".into()));
    }
    for (x, y) in lake {
        if x >= width || y >= height {
            return Err(SimError::BadLayout(format!("lake cell ({x}, {y}) out of bounds")));
        }
        tiles[(y * width + x) as usize] = TileKind::Water;
    }
    grid = TileGrid::from_tiles(width, height, tiles).expect("same shape");
    let runoff = RunoffField::compute(&grid).expect("lake is non-empty");
    let nutrients = grid
        .tiles()
        .iter()
        .map(|k| {
            if k.is_water() {
                config.water_nutrient
            } else {
                config.land_nutrient
            }
        })
        .collect();

    let mut world = WorldState {
        config: config.clone(),
        session_id,
        next_seq: 1,
        nutrients,
        money: config.start_money,
        food: config.start_food,
        milk: 0,
        population: 0,
        tick: 0,
        blooms_active: BTreeSet::new(),
        achievements_awarded: BTreeSet::new(),
        rng: ChaCha8Rng::seed_from_u64(seed),
        truth: GroundTruth::default(),
        last_balance: MassBalance::default(),
        built_at: vec![None; grid.tiles().len()],
        runoff,
        pending: MassBalance::default(),
        grid,
    };
    let start = world.event(Payload::SessionStart {
        grid: world.grid.clone(),
    });
    Ok((world, start))
}

impl WorldState {
    fn idx(&self, x: u32, y: u32) -> usize {
        (y * self.grid.width() + x) as usize
    }

    pub fn nutrient(&self, x: u32, y: u32) -> f64 {
        self.nutrients[self.idx(x, y)]
    }

    pub fn set_nutrient(&mut self, x: u32, y: u32, level: f64) {
        let i = self.idx(x, y);
        self.nutrients[i] = level;
    }

    pub fn total_nutrients(&self) -> f64 {
        self.nutrients.iter().sum()
    }

    pub fn runoff_field(&self) -> &RunoffField {
        &self.runoff
    }

    /// Stamps a payload with this session's next seq and the current tick time.
    pub(crate) fn event(&mut self, payload: Payload) -> GameEvent {
        let e = GameEvent {
            session_id: self.session_id.clone(),
            seq: self.next_seq,
            t_ms: self.config.tick_ms(self.tick),
            payload,
        };
        self.next_seq += 1;
        e
    }

    pub(crate) fn begin_tick(&mut self) {
        self.tick += 1;
        self.pending = MassBalance {
            before: self.total_nutrients(),
            ..MassBalance::default()
        };
    }

    pub(crate) fn end_tick(&mut self) {
        self.pending.after = self.total_nutrients();
        self.last_balance = self.pending;
    }

    pub fn build_cost(&self, kind: TileKind) -> u64 {
        match kind {
            TileKind::House => self.config.build_costs.house,
            TileKind::CornField => self.config.build_costs.corn,
            TileKind::DairyFarm => self.config.build_costs.dairy,
            _ => u64::MAX,
        }
    }

    /// Whether the current corn fields, harvesting every growth cycle, grow
    /// enough food for `farmers`.
    pub fn can_feed(&self, farmers: u64) -> bool {
        let fields = self.grid.count(TileKind::CornField) as u64;
        let grown = fields * self.config.food_per_harvest * 10;
        let eaten = farmers * self.config.upkeep_food_per_farmer_per_10_ticks * self.config.corn_growth_ticks;
        grown >= eaten
    }

    pub fn can_build(&self, kind: TileKind, x: u32, y: u32) -> bool {
        self.money >= self.build_cost(kind) && self.grid.get(x, y) == Some(TileKind::LandEmpty)
    }

    pub(crate) fn build(&mut self, kind: TileKind, x: u32, y: u32, out: &mut Vec<GameEvent>) -> bool {
        if !self.can_build(kind, x, y) {
            return false;
        }
        self.grid.build(x, y, kind).expect("placement checked");
        self.money -= self.build_cost(kind);
        let i = self.idx(x, y);
        self.built_at[i] = Some(self.tick);
        out.push(self.event(Payload::Build { building: kind, x, y }));
        match kind {
            TileKind::CornField => {
                self.truth.fields_built += 1;
                if self.truth.diagonal_since_tick.is_none() && self.completes_chain(x, y) {
                    self.truth.diagonal_since_tick = Some(self.tick);
                }
            }
            TileKind::House => {
                self.population += self.config.farmers_per_house;
                out.push(self.event(Payload::Population { count: self.population }));
            }
            _ => {}
        }
        true
    }

    /// Whether a field at `(x, y)` forms a runoff pair with an existing field,
    /// in either direction. Checked against the cached runoff field.
    fn completes_chain(&self, x: u32, y: u32) -> bool {
        let is_field = |cx: i64, cy: i64| {
            self.grid.in_bounds(cx, cy) && self.grid.get(cx as u32, cy as u32) == Some(TileKind::CornField)
        };
        let step = self.runoff.step(x, y);
        if is_field(x as i64 + step.dx as i64, y as i64 + step.dy as i64) {
            return true;
        }
        [(-1i64, -1i64), (-1, 1), (1, -1), (1, 1)].iter().any(|&(dx, dy)| {
            let (nx, ny) = (x as i64 + dx, y as i64 + dy);
            if !is_field(nx, ny) {
                return false;
            }
            let s = self.runoff.step(nx as u32, ny as u32);
            nx + s.dx as i64 == x as i64 && ny + s.dy as i64 == y as i64
        })
    }

    pub(crate) fn fertilize(&mut self, x: u32, y: u32, out: &mut Vec<GameEvent>) -> bool {
        let Some(kind) = self.grid.get(x, y) else {
            return false;
        };
        if kind.is_water() || self.money < self.config.fertilizer_cost {
            return false;
        }
        self.money -= self.config.fertilizer_cost;
        let i = self.idx(x, y);
        let boosted = self.nutrients[i] + self.config.fertilizer_boost;
        self.pending.fertilizer_added += self.config.fertilizer_boost;
        if boosted > 1.0 {
            self.pending.clamp_loss += boosted - 1.0;
        }
        self.nutrients[i] = boosted.min(1.0);
        out.push(self.event(Payload::Fertilize { x, y }));
        true
    }

    pub(crate) fn sell(&mut self, produce: Produce, amount: u64, out: &mut Vec<GameEvent>) -> bool {
        let (stock, price) = match produce {
            Produce::Corn => (&mut self.food, self.config.corn_price),
            Produce::Milk => (&mut self.milk, self.config.milk_price),
        };
        if amount == 0 || *stock < amount {
            return false;
        }
        *stock -= amount;
        let money = amount * price;
        self.money += money;
        self.truth.money_earned += money;
        out.push(self.event(Payload::Sell { produce, amount, money }));
        true
    }

    pub(crate) fn complete_tutorial(&mut self, tutorial_id: u8, out: &mut Vec<GameEvent>) {
        self.truth.tutorials.insert(tutorial_id);
        out.push(self.event(Payload::TutorialComplete { tutorial_id }));
    }

    pub(crate) fn inspect(&mut self, x: u32, y: u32, out: &mut Vec<GameEvent>) {
        out.push(self.event(Payload::TileInspect { x, y }));
    }

    pub(crate) fn heartbeat(&mut self, out: &mut Vec<GameEvent>) {
        out.push(self.event(Payload::Input {}));
    }

    /// Corn fields harvest once per growth cycle if their tile holds enough
    /// nutrients; dairies produce milk on the same cycle.
    pub(crate) fn grow(&mut self) {
        let cycle = self.config.corn_growth_ticks;
        let need = self.config.corn_nutrient_per_harvest;
        for i in 0..self.nutrients.len() {
            let Some(built) = self.built_at[i] else { continue };
            let age = self.tick - built;
            if age == 0 || !age.is_multiple_of(cycle) {
                continue;
            }
            match self.grid.tiles()[i] {
                TileKind::CornField if self.nutrients[i] >= need => {
                    self.nutrients[i] -= need;
                    self.pending.harvest_consumed += need;
                    self.food += self.config.food_per_harvest;
                }
                TileKind::DairyFarm => self.milk += self.config.milk_per_dairy_per_cycle,
                _ => {}
            }
        }
    }

    /// Moves `runoff_fraction_per_tick` of each land cell's excess above the
    /// base land level one diagonal step toward the nearest lake. All
    /// transfers use the levels from before the step; a step that would
    /// leave the map is dropped. Returns the clamp loss.
    pub fn runoff_step(&mut self) -> f64 {
        let base = self.config.land_nutrient;
        let fraction = self.config.runoff_fraction_per_tick;
        let mut delta = vec![0.0; self.nutrients.len()];
        for (x, y, kind) in self.grid.cells() {
            if kind.is_water() {
                continue;
            }
            let i = self.idx(x, y);
            let level = self.nutrients[i];
            if level <= base {
                continue;
            }
            let Some((tx, ty)) = self.runoff.step(x, y).from_cell(&self.grid, x, y) else {
                continue;
            };
            let moved = fraction * (level - base);
            delta[i] -= moved;
            delta[self.idx(tx, ty)] += moved;
        }
        let mut clamp_loss = 0.0;
        for (level, d) in self.nutrients.iter_mut().zip(delta) {
            *level += d;
            if *level > 1.0 {
                clamp_loss += *level - 1.0;
                *level = 1.0;
            } else if *level < 0.0 {
                clamp_loss += *level;
                *level = 0.0;
            }
        }
        self.pending.clamp_loss += clamp_loss;
        clamp_loss
    }

    /// Emits BLOOM for lakes at or above the bloom threshold and BLOOM_CLEAR
    /// for blooms that fell below the clear level, then decays lake nutrients.
    pub(crate) fn update_blooms(&mut self, out: &mut Vec<GameEvent>) {
        let cells: Vec<(u32, u32, TileKind)> = self.grid.cells().filter(|(_, _, k)| k.is_water()).collect();
        for (x, y, kind) in cells {
            let level = self.nutrient(x, y);
            match kind {
                TileKind::Water if level >= self.config.bloom_threshold => {
                    self.grid.set_bloom(x, y, true).expect("cell is water");
                    self.blooms_active.insert((x, y));
                    self.truth.blooms += 1;
                    out.push(self.event(Payload::Bloom { x, y }));
                }
                TileKind::WaterBloom if level < self.config.bloom_clear_level => {
                    self.grid.set_bloom(x, y, false).expect("cell is bloomed");
                    self.blooms_active.remove(&(x, y));
                    out.push(self.event(Payload::BloomClear { x, y }));
                }
                _ => {}
            }
            let decay = level * self.config.lake_decay_fraction_per_tick;
            self.pending.lake_decay += decay;
            self.set_nutrient(x, y, level - decay);
        }
    }

    /// Every 10 ticks each farmer eats; farmers without food die.
    pub(crate) fn upkeep(&mut self, out: &mut Vec<GameEvent>) {
        if !self.tick.is_multiple_of(10) || self.population == 0 {
            return;
        }
        let per_farmer = self.config.upkeep_food_per_farmer_per_10_ticks;
        let need = self.population * per_farmer;
        if self.food >= need {
            self.food -= need;
            return;
        }
        let deficit = need - self.food;
        let deaths = deficit.div_ceil(per_farmer).min(self.population);
        self.food = 0;
        self.population -= deaths;
        self.truth.deaths += deaths;
        out.push(self.event(Payload::FarmerDeath { count: deaths }));
        out.push(self.event(Payload::Population { count: self.population }));
    }

    pub fn track_units(&self, track: Track) -> u64 {
        match track {
            Track::Tutorial => self.truth.tutorials.len() as u64,
            Track::Money => self.truth.money_earned / 10,
            Track::Bloom => self.truth.blooms,
            Track::Farm => self.truth.fields_built,
            Track::Population => self.population,
        }
    }

    pub(crate) fn award_achievements(&mut self, out: &mut Vec<GameEvent>) {
        for track in Track::ALL {
            let units = self.track_units(track);
            let tiers = self.config.achievement_tiers;
            for (i, &threshold) in tiers.iter().enumerate() {
                let tier = i as u8 + 1;
                if units >= threshold && self.achievements_awarded.insert((track, tier)) {
                    out.push(self.event(Payload::Achievement { track, tier }));
                }
            }
        }
    }

    /// Debug check of the state invariants.
    pub fn check_invariants(&self) -> Result<(), String> {
        if let Some(n) = self.nutrients.iter().find(|n| !(0.0..=1.0).contains(*n)) {
            return Err(format!("nutrient level {n} outside [0, 1]"));
        }
        for (x, y, kind) in self.grid.cells() {
            if (kind == TileKind::WaterBloom) != self.blooms_active.contains(&(x, y)) {
                return Err(format!("bloom set disagrees with tile at ({x}, {y})"));
            }
        }
        Ok(())
    }
}

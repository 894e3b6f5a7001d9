//! Whole-class simulation: one independent world per player, batched the
//! way a game client would upload them.

use lakeland_core::features::TownComposition;
use lakeland_core::{par, GameEvent, SessionId};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::config::SimConfig;
use crate::error::SimError;
use crate::policy::{Bot, BotPolicy};
use crate::sink::Sink;
use crate::tick::sim_tick;
use crate::world::{world_init, LakeLayout, MassBalance, WorldState};

pub const MAP_SIDE: u32 = 16;
pub const LAKE_SIDE: u32 = 3;
/// Simulated seconds covered by one upload batch.
pub const BATCH_SECONDS: f64 = 2.0;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PlayerPlan {
    pub index: usize,
    pub name: String,
    pub session_id: SessionId,
    pub policy: BotPolicy,
    pub seed: u64,
}

/// Per-player seed, decorrelated from neighbouring indices.
pub fn player_seed(class_seed: u64, index: usize) -> u64 {
    // splitmix64 finalizer
    let mut z = class_seed ^ (index as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn player_name(index: usize) -> String {
    format!("player-{:02}", index + 1)
}

/// Steps one player's world and bot.
#[derive(Debug, Clone)]
pub struct PlayerSim {
    pub world: WorldState,
    pub bot: Bot,
}

impl PlayerSim {
    /// Builds the player's map (a square lake at a seeded position) and
    /// returns the SESSION_START event.
    pub fn new(plan: &PlayerPlan, config: &SimConfig) -> Result<(Self, GameEvent), SimError> {
        let mut layout_rng = ChaCha8Rng::seed_from_u64(plan.seed);
        let lake = LakeLayout::Rect {
            x: layout_rng.random_range(0..=MAP_SIDE - LAKE_SIDE),
            y: layout_rng.random_range(0..=MAP_SIDE - LAKE_SIDE),
            width: LAKE_SIDE,
            height: LAKE_SIDE,
        };
        let (mut world, start) = world_init(
            plan.session_id.clone(),
            MAP_SIDE,
            MAP_SIDE,
            &lake,
            layout_rng.random(),
            config,
        )?;
        let bot = Bot::new(plan.policy, &mut world);
        Ok((Self { world, bot }, start))
    }

    pub fn step(&mut self) -> Vec<GameEvent> {
        sim_tick(&mut self.world, &mut self.bot)
    }

    pub fn balance(&self) -> MassBalance {
        self.world.last_balance
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Batch {
    /// First tick covered by this batch.
    pub first_tick: u64,
    pub events: Vec<GameEvent>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PlayerTruth {
    pub diagonal: bool,
    pub diagonal_since_tick: Option<u64>,
    pub deaths: u64,
    pub blooms: u64,
    pub tutorials: u64,
    pub population: u64,
    pub town: TownComposition,
    pub fields_built: u64,
    pub money_earned: u64,
}

impl PlayerTruth {
    fn of(world: &WorldState) -> Self {
        Self {
            diagonal: world.truth.diagonal_since_tick.is_some(),
            diagonal_since_tick: world.truth.diagonal_since_tick,
            deaths: world.truth.deaths,
            blooms: world.truth.blooms,
            tutorials: world.truth.tutorials.len() as u64,
            population: world.population,
            town: TownComposition::scan(&world.grid),
            fields_built: world.truth.fields_built,
            money_earned: world.truth.money_earned,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PlayerStream {
    pub plan: PlayerPlan,
    /// Non-empty upload batches in time order.
    pub batches: Vec<Batch>,
    pub truth: PlayerTruth,
}

impl PlayerStream {
    pub fn events(&self) -> impl Iterator<Item = &GameEvent> {
        self.batches.iter().flat_map(|b| b.events.iter())
    }

    pub fn event_count(&self) -> usize {
        self.batches.iter().map(|b| b.events.len()).sum()
    }
}

pub fn ticks_per_batch(config: &SimConfig) -> u64 {
    ((BATCH_SECONDS / config.tick_s).round() as u64).max(1)
}

/// Runs one player for `duration_ticks` ticks and groups its events into
/// upload batches.
pub fn simulate_player(plan: &PlayerPlan, duration_ticks: u64, config: &SimConfig) -> Result<PlayerStream, SimError> {
    let (mut sim, start) = PlayerSim::new(plan, config)?;
    let per_batch = ticks_per_batch(config);
    let mut batches = Vec::new();
    let mut current = Batch {
        first_tick: 0,
        events: vec![start],
    };
    for _ in 0..duration_ticks {
        let events = sim.step();
        let tick = sim.world.tick;
        if tick % per_batch == 0 {
            let next = Batch {
                first_tick: tick,
                events: Vec::new(),
            };
            let done = std::mem::replace(&mut current, next);
            if !done.events.is_empty() {
                batches.push(done);
            }
        }
        current.events.extend(events);
    }
    if !current.events.is_empty() {
        batches.push(current);
    }
    Ok(PlayerStream {
        plan: plan.clone(),
        batches,
        truth: PlayerTruth::of(&sim.world),
    })
}

pub fn plans(policies: &[BotPolicy], session_ids: Vec<SessionId>, seed: u64) -> Vec<PlayerPlan> {
    policies
        .iter()
        .zip(session_ids)
        .enumerate()
        .map(|(index, (&policy, session_id))| PlayerPlan {
            index,
            name: player_name(index),
            session_id,
            policy,
            seed: player_seed(seed, index),
        })
        .collect()
}

/// Simulates every plan, in parallel when the `parallel` feature is on.
pub fn simulate_class(
    plans: &[PlayerPlan],
    duration_ticks: u64,
    config: &SimConfig,
) -> Result<Vec<PlayerStream>, SimError> {
    par::map(plans, |plan| simulate_player(plan, duration_ticks, config))
        .into_iter()
        .collect()
}

pub fn simulate_class_sequential(
    plans: &[PlayerPlan],
    duration_ticks: u64,
    config: &SimConfig,
) -> Result<Vec<PlayerStream>, SimError> {
    plans
        .iter()
        .map(|plan| simulate_player(plan, duration_ticks, config))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PlayerSummary {
    pub index: usize,
    pub name: String,
    pub session_id: SessionId,
    pub policy: BotPolicy,
    pub events: usize,
    pub batches: usize,
    pub truth: PlayerTruth,
    /// Why delivery to the sink was abandoned, if it was.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub aborted: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ClassSummary {
    pub seed: u64,
    pub duration_ticks: u64,
    pub players: Vec<PlayerSummary>,
}

/// Registers `policies.len()` players with the sink, simulates them and
/// delivers their events.
pub fn run_class_simulation(
    policies: &[BotPolicy],
    duration_ticks: u64,
    seed: u64,
    config: &SimConfig,
    sink: &mut dyn Sink,
) -> Result<ClassSummary, SimError> {
    config.validate()?;
    let names: Vec<String> = (0..policies.len()).map(player_name).collect();
    let ids = if names.is_empty() {
        Vec::new()
    } else {
        sink.allocate_sessions(&names, seed)?
    };
    let plans = plans(policies, ids, seed);
    let streams = simulate_class(&plans, duration_ticks, config)?;
    let outcomes = if streams.is_empty() {
        Vec::new()
    } else {
        sink.deliver(&streams, config)?
    };
    let summary = ClassSummary {
        seed,
        duration_ticks,
        players: streams
            .into_iter()
            .zip(outcomes.into_iter().chain(std::iter::repeat(None)))
            .map(|(s, aborted)| PlayerSummary {
                index: s.plan.index,
                name: s.plan.name.clone(),
                session_id: s.plan.session_id.clone(),
                policy: s.plan.policy,
                events: s.event_count(),
                batches: s.batches.len(),
                truth: s.truth,
                aborted,
            })
            .collect(),
    };
    sink.finish(&summary)?;
    Ok(summary)
}

//! Headless farming-town simulator with scripted bot players.
//!
//! Each player gets an independent world (a small map with a lake) and a
//! bot policy. Ticking the world produces the same events a real game
//! client would upload, plus a ground-truth tally that dashboard models can
//! be checked against.

pub mod config;
pub mod error;
pub mod policy;
pub mod runner;
pub mod sink;
pub mod tick;
pub mod world;

pub use config::{BuildCosts, SimConfig};
pub use error::SimError;
pub use policy::{Bot, BotPolicy, PolicyMix};
pub use runner::{
    run_class_simulation, simulate_class, simulate_class_sequential, simulate_player, Batch, ClassSummary, PlayerPlan,
    PlayerSim, PlayerStream, PlayerSummary, PlayerTruth,
};
pub use sink::{FileSink, HttpSink, Sink};
pub use tick::sim_tick;
pub use world::{world_init, GroundTruth, LakeLayout, MassBalance, WorldState};

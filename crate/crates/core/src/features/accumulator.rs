//! Per-session fold state.

use std::collections::BTreeSet;

use serde::Serialize;
use thiserror::Error;

use crate::event::{GameEvent, Payload, Track};
use crate::grid::{GridError, TileGrid, TileKind};
use crate::ids::SessionId;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ApplyError {
    #[error("sequence gap: expected seq {expected}, got {got}")]
    SequenceGap { expected: u64, got: u64 },
    #[error("duplicate event: seq {got} already applied (last seq {last})")]
    Duplicate { got: u64, last: u64 },
    #[error("event belongs to session {got}, not {expected}")]
    WrongSession { expected: SessionId, got: SessionId },
    #[error(transparent)]
    Grid(#[from] GridError),
}

/// Everything the dashboard models need about one session, folded from
/// its events. Clocks are server receive times in milliseconds.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SessionAccumulator {
    pub session_id: SessionId,
    pub started_at: u64,
    pub last_seq: u64,
    pub grid: TileGrid,
    pub tutorials_done: BTreeSet<u8>,
    pub deaths_total: u64,
    pub population: u64,
    pub money_earned_total: u64,
    pub blooms_total: u64,
    pub fields_built_total: u64,
    pub achievements: BTreeSet<(Track, u8)>,
    pub last_input_at: u64,
    pub last_build_at: u64,
    pub last_sale_at: u64,
    pub last_inspect_at: u64,
}

impl SessionAccumulator {
    /// A session with no events applied. All "last X" clocks start at
    /// `started_at` and are reset when SESSION_START arrives.
    pub fn new(session_id: SessionId, started_at: u64) -> Self {
        Self {
            session_id,
            started_at,
            last_seq: 0,
            grid: TileGrid::placeholder(),
            tutorials_done: BTreeSet::new(),
            deaths_total: 0,
            population: 0,
            money_earned_total: 0,
            blooms_total: 0,
            fields_built_total: 0,
            achievements: BTreeSet::new(),
            last_input_at: started_at,
            last_build_at: started_at,
            last_sale_at: started_at,
            last_inspect_at: started_at,
        }
    }

    pub fn is_started(&self) -> bool {
        self.last_seq > 0
    }

    pub fn tutorials_completed(&self) -> u64 {
        self.tutorials_done.len() as u64
    }

    /// Applies one event in place. On error the accumulator is unchanged.
    pub fn apply(&mut self, event: &GameEvent, received_at: u64) -> Result<(), ApplyError> {
        if event.session_id != self.session_id {
            return Err(ApplyError::WrongSession {
                expected: self.session_id.clone(),
                got: event.session_id.clone(),
            });
        }
        if event.seq <= self.last_seq {
            return Err(ApplyError::Duplicate {
                got: event.seq,
                last: self.last_seq,
            });
        }
        if event.seq > self.last_seq + 1 {
            return Err(ApplyError::SequenceGap {
                expected: self.last_seq + 1,
                got: event.seq,
            });
        }

        // The grid write is the only fallible step, so it goes first.
        match &event.payload {
            Payload::SessionStart { grid } => self.grid = grid.clone(),
            _ => self.grid.apply_event(event)?,
        }

        self.last_seq = event.seq;
        if let Payload::SessionStart { .. } = event.payload {
            // Playing time and the idle clocks count from the first event.
            self.started_at = received_at;
            self.last_build_at = received_at;
            self.last_sale_at = received_at;
            self.last_inspect_at = received_at;
        }
        self.last_input_at = received_at;
        match &event.payload {
            Payload::TutorialComplete { tutorial_id } => {
                self.tutorials_done.insert(*tutorial_id);
            }
            Payload::Build { building, .. } => {
                self.last_build_at = received_at;
                if *building == TileKind::CornField {
                    self.fields_built_total += 1;
                }
            }
            Payload::Sell { money, .. } => {
                self.last_sale_at = received_at;
                self.money_earned_total += money;
            }
            Payload::TileInspect { .. } => self.last_inspect_at = received_at,
            Payload::FarmerDeath { count } => {
                self.deaths_total += count;
                self.population = self.population.saturating_sub(*count);
            }
            Payload::Population { count } => self.population = *count,
            Payload::Bloom { .. } => self.blooms_total += 1,
            Payload::Achievement { track, tier } => {
                self.achievements.insert((*track, *tier));
            }
            Payload::SessionStart { .. }
            | Payload::Fertilize { .. }
            | Payload::BloomClear { .. }
            | Payload::Input {} => {}
        }
        Ok(())
    }

    /// Functional form of [`SessionAccumulator::apply`].
    pub fn apply_event(&self, event: &GameEvent, received_at: u64) -> Result<Self, ApplyError> {
        let mut next = self.clone();
        next.apply(event, received_at)?;
        Ok(next)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::event::Produce;

    fn sid() -> SessionId {
        SessionId::parse("acc-test-1").unwrap()
    }

    fn ev(seq: u64, payload: Payload) -> GameEvent {
        GameEvent {
            session_id: sid(),
            seq,
            t_ms: seq * 100,
            payload,
        }
    }

    fn started(at: u64) -> SessionAccumulator {
        let grid = TileGrid::from_tiles(3, 1, vec![TileKind::LandEmpty, TileKind::LandEmpty, TileKind::Water]).unwrap();
        SessionAccumulator::new(sid(), at)
            .apply_event(&ev(1, Payload::SessionStart { grid }), at)
            .unwrap()
    }

    #[test]
    fn tutorial_insertion() {
        let acc = SessionAccumulator::new(sid(), 0);
        let acc = acc
            .apply_event(&ev(1, Payload::TutorialComplete { tutorial_id: 3 }), 10)
            .unwrap();
        assert_eq!(acc.tutorials_completed(), 1);
        let acc = acc
            .apply_event(&ev(2, Payload::TutorialComplete { tutorial_id: 3 }), 20)
            .unwrap();
        assert_eq!(acc.tutorials_completed(), 1);
    }

    #[test]
    fn farmer_deaths_accumulate() {
        let mut acc = started(0);
        acc.deaths_total = 2;
        acc.population = 4;
        let acc = acc.apply_event(&ev(2, Payload::FarmerDeath { count: 1 }), 5).unwrap();
        assert_eq!(acc.deaths_total, 3);
        assert_eq!(acc.population, 3);
        let acc = acc.apply_event(&ev(3, Payload::FarmerDeath { count: 9 }), 6).unwrap();
        assert_eq!(acc.population, 0);
    }

    #[test]
    fn sale_updates_money_and_clock() {
        let acc = started(1000);
        let acc = acc
            .apply_event(
                &ev(
                    2,
                    Payload::Sell {
                        produce: Produce::Corn,
                        amount: 5,
                        money: 25,
                    },
                ),
                120_000,
            )
            .unwrap();
        assert_eq!(acc.money_earned_total, 25);
        assert_eq!(acc.last_sale_at, 120_000);
        assert_eq!(acc.last_input_at, 120_000);
        assert_eq!(acc.last_build_at, 1000);
    }

    #[test]
    fn build_and_bloom() {
        let acc = started(0);
        let acc = acc
            .apply_event(
                &ev(
                    2,
                    Payload::Build {
                        building: TileKind::CornField,
                        x: 0,
                        y: 0,
                    },
                ),
                7,
            )
            .unwrap()
            .apply_event(
                &ev(
                    3,
                    Payload::Build {
                        building: TileKind::House,
                        x: 1,
                        y: 0,
                    },
                ),
                8,
            )
            .unwrap()
            .apply_event(&ev(4, Payload::Bloom { x: 2, y: 0 }), 9)
            .unwrap()
            .apply_event(&ev(5, Payload::TileInspect { x: 2, y: 0 }), 11)
            .unwrap();
        assert_eq!(acc.fields_built_total, 1);
        assert_eq!(acc.last_build_at, 8);
        assert_eq!(acc.blooms_total, 1);
        assert_eq!(acc.last_inspect_at, 11);
        assert_eq!(acc.grid.get(2, 0), Some(TileKind::WaterBloom));
    }

    #[test]
    fn sequence_errors_leave_state_untouched() {
        let acc = started(0);
        assert_eq!(
            acc.apply_event(&ev(3, Payload::Input {}), 1),
            Err(ApplyError::SequenceGap { expected: 2, got: 3 })
        );
        assert_eq!(
            acc.apply_event(&ev(1, Payload::Input {}), 1),
            Err(ApplyError::Duplicate { got: 1, last: 1 })
        );
        let mut copy = acc.clone();
        let bad = ev(
            2,
            Payload::Build {
                building: TileKind::DairyFarm,
                x: 2,
                y: 0,
            },
        );
        assert!(matches!(copy.apply(&bad, 5), Err(ApplyError::Grid(_))));
        assert_eq!(copy, acc);
    }

    #[test]
    fn rejects_foreign_session() {
        let acc = started(0);
        let mut e = ev(2, Payload::Input {});
        e.session_id = SessionId::parse("someone-else").unwrap();
        assert!(matches!(acc.apply_event(&e, 1), Err(ApplyError::WrongSession { .. })));
    }

    #[test]
    fn session_start_resets_clocks() {
        let grid = TileGrid::placeholder();
        let acc = SessionAccumulator::new(sid(), 100)
            .apply_event(&ev(1, Payload::SessionStart { grid }), 5_000)
            .unwrap();
        assert_eq!(acc.started_at, 5_000);
        assert_eq!(
            (
                acc.last_input_at,
                acc.last_build_at,
                acc.last_sale_at,
                acc.last_inspect_at
            ),
            (5_000, 5_000, 5_000, 5_000)
        );
    }
}

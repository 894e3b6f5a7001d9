//! Class codes and player registration.
//!
//! A class code is the only thing that grants a teacher view, and every
//! session belongs to at most one class. Mutations are expressed as
//! [`RegistryRecord`]s so callers can persist a record before applying it.

use std::collections::HashMap;

use rand::Rng;
use serde::Serialize;
use thiserror::Error;

use crate::ids::{ClassCode, SessionId};

pub const MAX_CODE_ATTEMPTS: usize = 16;
pub const MAX_NAME_CHARS: usize = 32;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RegistryError {
    #[error("no free class code after {MAX_CODE_ATTEMPTS} attempts")]
    Exhausted,
    #[error("unknown class {0}")]
    UnknownClass(ClassCode),
    #[error("name {0:?} is already taken in this class")]
    DuplicateName(String),
    #[error("display name must be 1..={MAX_NAME_CHARS} printable characters")]
    InvalidName,
    #[error("session {0} is not registered to any class")]
    NotRegistered(SessionId),
    #[error("class {0} already exists")]
    DuplicateClass(ClassCode),
    #[error("session {0} is already registered")]
    DuplicateSession(SessionId),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Player {
    pub display_name: String,
    pub session_id: SessionId,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ClassRoster {
    pub code: ClassCode,
    pub created_at: u64,
    /// Registration order.
    pub players: Vec<Player>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RegistryRecord {
    ClassCreated {
        code: ClassCode,
        created_at: u64,
    },
    PlayerRegistered {
        code: ClassCode,
        name: String,
        session_id: SessionId,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Registration {
    pub session_id: SessionId,
    pub play_url: String,
}

/// Game URL handed to a registered student.
pub fn play_url(base: &str, session_id: &SessionId) -> String {
    format!("{}/play?session={}", base.trim_end_matches('/'), session_id)
}

pub fn validate_display_name(name: &str) -> Result<(), RegistryError> {
    let len = name.chars().count();
    if len == 0 || len > MAX_NAME_CHARS || name.chars().any(char::is_control) || name.trim().is_empty() {
        return Err(RegistryError::InvalidName);
    }
    Ok(())
}

#[derive(Debug, Clone, Default)]
pub struct Registry {
    rosters: Vec<ClassRoster>,
    by_code: HashMap<ClassCode, usize>,
    by_session: HashMap<SessionId, ClassCode>,
}

impl Registry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn rosters(&self) -> &[ClassRoster] {
        &self.rosters
    }

    pub fn roster(&self, code: &ClassCode) -> Option<&ClassRoster> {
        self.by_code.get(code).map(|&i| &self.rosters[i])
    }

    pub fn player_count(&self) -> usize {
        self.by_session.len()
    }

    pub fn resolve_class(&self, session_id: &SessionId) -> Result<ClassCode, RegistryError> {
        self.by_session
            .get(session_id)
            .copied()
            .ok_or_else(|| RegistryError::NotRegistered(session_id.clone()))
    }

    /// Draws a code not yet in use, without registering it.
    pub fn propose_class<R: Rng + ?Sized>(
        &self,
        rng: &mut R,
        created_at: u64,
    ) -> Result<RegistryRecord, RegistryError> {
        for _ in 0..MAX_CODE_ATTEMPTS {
            let code = ClassCode::generate(rng);
            if !self.by_code.contains_key(&code) {
                return Ok(RegistryRecord::ClassCreated { code, created_at });
            }
        }
        Err(RegistryError::Exhausted)
    }

    /// Checks a registration and allocates its session id, without applying it.
    pub fn propose_player<R: Rng + ?Sized>(
        &self,
        code: &ClassCode,
        name: &str,
        rng: &mut R,
    ) -> Result<RegistryRecord, RegistryError> {
        self.check_player(code, name)?;
        let session_id = loop {
            let candidate = SessionId::generate(rng);
            if !self.by_session.contains_key(&candidate) {
                break candidate;
            }
        };
        Ok(RegistryRecord::PlayerRegistered {
            code: *code,
            name: name.to_owned(),
            session_id,
        })
    }

    fn check_player(&self, code: &ClassCode, name: &str) -> Result<&ClassRoster, RegistryError> {
        let roster = self.roster(code).ok_or(RegistryError::UnknownClass(*code))?;
        validate_display_name(name)?;
        let folded = name.to_lowercase();
        if roster.players.iter().any(|p| p.display_name.to_lowercase() == folded) {
            return Err(RegistryError::DuplicateName(name.to_owned()));
        }
        Ok(roster)
    }

    /// Applies a record, re-checking every invariant (records also come
    /// from the log on replay).
    pub fn apply(&mut self, record: &RegistryRecord) -> Result<(), RegistryError> {
        match record {
            RegistryRecord::ClassCreated { code, created_at } => {
                if self.by_code.contains_key(code) {
                    return Err(RegistryError::DuplicateClass(*code));
                }
                self.by_code.insert(*code, self.rosters.len());
                self.rosters.push(ClassRoster {
                    code: *code,
                    created_at: *created_at,
                    players: Vec::new(),
                });
            }
            RegistryRecord::PlayerRegistered { code, name, session_id } => {
                self.check_player(code, name)?;
                if self.by_session.contains_key(session_id) {
                    return Err(RegistryError::DuplicateSession(session_id.clone()));
                }
                let i = self.by_code[code];
                self.rosters[i].players.push(Player {
                    display_name: name.clone(),
                    session_id: session_id.clone(),
                });
                self.by_session.insert(session_id.clone(), *code);
            }
        }
        Ok(())
    }

    pub fn create_class<R: Rng + ?Sized>(&mut self, rng: &mut R, created_at: u64) -> Result<ClassCode, RegistryError> {
        let record = self.propose_class(rng, created_at)?;
        self.apply(&record)?;
        let RegistryRecord::ClassCreated { code, .. } = record else {
            unreachable!()
        };
        Ok(code)
    }

    pub fn register_player<R: Rng + ?Sized>(
        &mut self,
        code: &ClassCode,
        name: &str,
        rng: &mut R,
        play_base: &str,
    ) -> Result<Registration, RegistryError> {
        let record = self.propose_player(code, name, rng)?;
        self.apply(&record)?;
        let RegistryRecord::PlayerRegistered { session_id, .. } = record else {
            unreachable!()
        };
        Ok(Registration {
            play_url: play_url(play_base, &session_id),
            session_id,
        })
    }
}

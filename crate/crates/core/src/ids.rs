//! Identifiers shared by every component: play-session ids and class codes.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Alphabet for class codes. The glyphs 0/O/1/I/L are left out so codes
/// can be read aloud and copied from a projector without ambiguity.
pub const CLASS_CODE_ALPHABET: &[u8] = b"ABCDEFGHJKMNPQRSTUVWXYZ23456789";
pub const CLASS_CODE_LEN: usize = 6;

const SESSION_ID_ALPHABET: &[u8] = b"ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789-_";
/// Length of ids handed out by [`SessionId::generate`].
pub const GENERATED_SESSION_ID_LEN: usize = 16;
pub const MAX_SESSION_ID_LEN: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IdError {
    #[error("session id must be 1..={MAX_SESSION_ID_LEN} characters, got {0}")]
    SessionIdLength(usize),
    #[error("session id contains a character outside [A-Za-z0-9_-]: {0:?}")]
    SessionIdCharacter(char),
    #[error("class code must be {CLASS_CODE_LEN} characters, got {0}")]
    ClassCodeLength(usize),
    #[error("class code contains a character outside the code alphabet: {0:?}")]
    ClassCodeCharacter(char),
}

/// Opaque, URL-safe identifier of one play session.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SessionId(String);

impl SessionId {
    pub fn parse(value: &str) -> Result<Self, IdError> {
        let len = value.chars().count();
        if len == 0 || len > MAX_SESSION_ID_LEN {
            return Err(IdError::SessionIdLength(len));
        }
        if let Some(bad) = value
            .chars()
            .find(|c| !(c.is_ascii_alphanumeric() || *c == '-' || *c == '_'))
        {
            return Err(IdError::SessionIdCharacter(bad));
        }
        Ok(Self(value.to_owned()))
    }

    /// Draws a fresh [`GENERATED_SESSION_ID_LEN`]-character id.
    pub fn generate<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let value = (0..GENERATED_SESSION_ID_LEN)
            .map(|_| SESSION_ID_ALPHABET[rng.random_range(0..SESSION_ID_ALPHABET.len())] as char)
            .collect();
        Self(value)
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for SessionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl FromStr for SessionId {
    type Err = IdError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::parse(s)
    }
}

impl Serialize for SessionId {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.0)
    }
}

impl<'de> Deserialize<'de> for SessionId {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = String::deserialize(deserializer)?;
        Self::parse(&raw).map_err(serde::de::Error::custom)
    }
}

/// Six-character code that binds student sessions to one teacher's view.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ClassCode([u8; CLASS_CODE_LEN]);

impl ClassCode {
    pub fn parse(value: &str) -> Result<Self, IdError> {
        let len = value.chars().count();
        if len != CLASS_CODE_LEN {
            return Err(IdError::ClassCodeLength(len));
        }
        let mut bytes = [0u8; CLASS_CODE_LEN];
        for (slot, c) in bytes.iter_mut().zip(value.chars()) {
            if !c.is_ascii() || !CLASS_CODE_ALPHABET.contains(&(c as u8)) {
                return Err(IdError::ClassCodeCharacter(c));
            }
            *slot = c as u8;
        }
        Ok(Self(bytes))
    }

    pub fn generate<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let mut bytes = [0u8; CLASS_CODE_LEN];
        for slot in &mut bytes {
            *slot = CLASS_CODE_ALPHABET[rng.random_range(0..CLASS_CODE_ALPHABET.len())];
        }
        Self(bytes)
    }

    pub fn as_str(&self) -> &str {
        // Only alphabet bytes are ever stored.
        std::str::from_utf8(&self.0).expect("class code is ASCII")
    }
}

impl fmt::Display for ClassCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ClassCode {
    type Err = IdError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::parse(s)
    }
}

impl Serialize for ClassCode {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for ClassCode {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = String::deserialize(deserializer)?;
        Self::parse(&raw).map_err(serde::de::Error::custom)
    }
}

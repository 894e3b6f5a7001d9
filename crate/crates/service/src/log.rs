//! The append-only log and replay.
//!
//! One JSON record per line. The log is the only durable state: registry
//! changes and accepted events are written here before they are applied,
//! and on startup the service state is rebuilt by replaying it.

use std::collections::BTreeMap;
use std::fs::{self, File, OpenOptions};
use std::io::{self, BufRead, BufReader, Read, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};

use lakeland_core::features::SessionAccumulator;
use lakeland_core::registry::{Registry, RegistryRecord};
use lakeland_core::{ClassCode, GameEvent, SessionId};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const LOG_FILE_NAME: &str = "events.log";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "record", rename_all = "SCREAMING_SNAKE_CASE", deny_unknown_fields)]
pub enum LogRecord {
    ClassCreated {
        code: ClassCode,
        created_at: u64,
    },
    PlayerRegistered {
        code: ClassCode,
        name: String,
        session_id: SessionId,
    },
    Event {
        received_at: u64,
        event: GameEvent,
    },
}

impl From<RegistryRecord> for LogRecord {
    fn from(r: RegistryRecord) -> Self {
        match r {
            RegistryRecord::ClassCreated { code, created_at } => LogRecord::ClassCreated { code, created_at },
            RegistryRecord::PlayerRegistered { code, name, session_id } => {
                LogRecord::PlayerRegistered { code, name, session_id }
            }
        }
    }
}

impl LogRecord {
    pub fn to_line(&self) -> String {
        let mut line = serde_json::to_string(self).expect("log records always serialize");
        line.push('\n');
        line
    }
}

/// Registry plus one accumulator per registered session.
#[derive(Debug, Clone, Default)]
pub struct ServiceState {
    pub registry: Registry,
    pub sessions: BTreeMap<SessionId, SessionAccumulator>,
    pub events: u64,
    /// Latest receive time seen in the log.
    pub last_received_at: u64,
}

impl ServiceState {
    /// Applies one record, or leaves the state untouched and says why not.
    pub fn apply(&mut self, record: &LogRecord) -> Result<(), String> {
        match record {
            LogRecord::ClassCreated { code, created_at } => self
                .registry
                .apply(&RegistryRecord::ClassCreated {
                    code: *code,
                    created_at: *created_at,
                })
                .map_err(|e| e.to_string()),
            LogRecord::PlayerRegistered { code, name, session_id } => {
                self.registry
                    .apply(&RegistryRecord::PlayerRegistered {
                        code: *code,
                        name: name.clone(),
                        session_id: session_id.clone(),
                    })
                    .map_err(|e| e.to_string())?;
                self.sessions
                    .insert(session_id.clone(), SessionAccumulator::new(session_id.clone(), 0));
                Ok(())
            }
            LogRecord::Event { received_at, event } => {
                let acc = self
                    .sessions
                    .get_mut(&event.session_id)
                    .ok_or_else(|| format!("event for unregistered session {}", event.session_id))?;
                acc.apply(event, *received_at).map_err(|e| e.to_string())?;
                self.events += 1;
                self.last_received_at = self.last_received_at.max(*received_at);
                Ok(())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("corrupt log at line {line}: {reason}")]
pub struct CorruptLog {
    /// 1-based line number of the first bad record.
    pub line: u64,
    /// Byte offset where that line starts; everything before it is valid.
    pub offset: u64,
    pub reason: String,
}

#[derive(Debug, Clone, Default)]
pub struct Replay {
    pub state: ServiceState,
    pub records: u64,
    pub corrupt: Option<CorruptLog>,
}

/// Rebuilds state from a log. Stops at the first line that is unterminated,
/// unparseable or inconsistent with the records before it, keeping the
/// state of the valid prefix.
pub fn replay(mut reader: impl BufRead) -> io::Result<Replay> {
    let mut out = Replay::default();
    let mut buf = Vec::new();
    let mut offset = 0u64;
    loop {
        buf.clear();
        let n = reader.read_until(b'\n', &mut buf)?;
        if n == 0 {
            return Ok(out);
        }
        let line = out.records + 1;
        let corrupt = |reason: String| CorruptLog { line, offset, reason };
        if buf.last() != Some(&b'\n') {
            out.corrupt = Some(corrupt("unterminated final line".into()));
            return Ok(out);
        }
        let result = serde_json::from_slice::<LogRecord>(&buf[..n - 1])
            .map_err(|e| e.to_string())
            .and_then(|record| out.state.apply(&record));
        if let Err(reason) = result {
            out.corrupt = Some(corrupt(reason));
            return Ok(out);
        }
        out.records += 1;
        offset += n as u64;
    }
}

/// Replays the log at `path`; a missing file is an empty log.
pub fn replay_file(path: &Path) -> io::Result<Replay> {
    match File::open(path) {
        Ok(f) => replay(BufReader::new(f)),
        Err(e) if e.kind() == io::ErrorKind::NotFound => Ok(Replay::default()),
        Err(e) => Err(e),
    }
}

/// Moves everything from `offset` on into a sidecar file next to the log
/// and truncates the log there, so new appends follow the valid prefix.
/// Returns the sidecar path.
pub fn quarantine_tail(path: &Path, offset: u64, stamp: u64) -> io::Result<PathBuf> {
    let mut file = OpenOptions::new().read(true).write(true).open(path)?;
    file.seek(SeekFrom::Start(offset))?;
    let mut tail = Vec::new();
    file.read_to_end(&mut tail)?;
    let sidecar = path.with_extension(format!("log.corrupt-{stamp}"));
    fs::write(&sidecar, &tail)?;
    file.set_len(offset)?;
    file.sync_all()?;
    Ok(sidecar)
}

/// Append handle on the log file.
#[derive(Debug)]
pub struct EventLog {
    file: File,
    len: u64,
    fsync: bool,
}

impl EventLog {
    pub fn open(path: &Path, fsync: bool) -> io::Result<Self> {
        let file = OpenOptions::new().create(true).append(true).open(path)?;
        let len = file.metadata()?.len();
        Ok(Self { file, len, fsync })
    }

    /// Writes the records as one contiguous chunk. If the write fails the
    /// file is cut back to its previous length so no partial line remains.
    pub fn append(&mut self, records: &[LogRecord]) -> io::Result<()> {
        let chunk: String = records.iter().map(LogRecord::to_line).collect();
        let written = self.file.write_all(chunk.as_bytes()).and_then(|()| {
            if self.fsync {
                self.file.sync_data()
            } else {
                self.file.flush()
            }
        });
        if let Err(e) = written {
            let _ = self.file.set_len(self.len);
            return Err(e);
        }
        self.len += chunk.len() as u64;
        Ok(())
    }

    pub fn len(&self) -> u64 {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }
}

//! The telemetry engine: registration, ingestion and dashboards over the
//! durable log.

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex, RwLock};

use lakeland_core::api::{ClassDashboard, Health, IngestAck, IngestRequest, PlayerPanel};
use lakeland_core::features::{snapshot_class, ModelConfig, SessionAccumulator};
use lakeland_core::registry::{play_url, Registration, Registry, RegistryError, RegistryRecord};
use lakeland_core::{decode_value, ClassCode, GameEvent, SessionId};
use rand::rngs::StdRng;
use rand::SeedableRng;
use tracing::{info, warn};

use crate::clock::Clock;
use crate::error::ServiceError;
use crate::log::{quarantine_tail, replay_file, EventLog, LogRecord, ServiceState, LOG_FILE_NAME};

#[derive(Debug, Clone, PartialEq)]
pub struct ServiceConfig {
    pub model: ModelConfig,
    pub poll_hint_s: u64,
    /// Base of the game URL handed to registered players.
    pub play_base: String,
    /// `sync_data` after every append instead of only flushing to the OS.
    pub fsync: bool,
    /// Seeds class codes and session ids, for reproducible tests.
    pub seed: Option<u64>,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        Self {
            model: ModelConfig::default(),
            poll_hint_s: 5,
            play_base: "http://localhost:8080".into(),
            fsync: false,
            seed: None,
        }
    }
}

/// What startup found in the data directory.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct StartupReport {
    pub records: u64,
    pub events: u64,
    /// The corrupt tail that was moved aside, if any, and where it went.
    pub quarantined: Option<(crate::log::CorruptLog, PathBuf)>,
}

type SessionCell = Arc<Mutex<SessionAccumulator>>;

/// Lock order: registry, then sessions map, then one session, then the log.
pub struct TelemetryService {
    config: ServiceConfig,
    clock: Arc<dyn Clock>,
    registry: RwLock<Registry>,
    sessions: RwLock<HashMap<SessionId, SessionCell>>,
    log: Mutex<EventLog>,
    events: AtomicU64,
    rng: Mutex<StdRng>,
}

impl TelemetryService {
    /// Replays `data_dir`'s log and opens it for appending. A corrupt tail
    /// is moved to a sidecar file and the service starts from the valid
    /// prefix.
    pub fn open(
        data_dir: &Path,
        config: ServiceConfig,
        clock: Arc<dyn Clock>,
    ) -> Result<(Self, StartupReport), ServiceError> {
        let unwritable = |source| ServiceError::DataDirUnwritable {
            path: data_dir.display().to_string(),
            source,
        };
        fs::create_dir_all(data_dir).map_err(unwritable)?;
        let path = data_dir.join(LOG_FILE_NAME);
        // Opening for append first proves the directory is writable.
        drop(EventLog::open(&path, false).map_err(unwritable)?);

        let replay = replay_file(&path)?;
        let mut report = StartupReport {
            records: replay.records,
            events: replay.state.events,
            quarantined: None,
        };
        if let Some(corrupt) = replay.corrupt {
            let sidecar = quarantine_tail(&path, corrupt.offset, clock.now_ms())?;
            warn!(%corrupt, sidecar = %sidecar.display(), "log tail moved aside; serving the valid prefix");
            report.quarantined = Some((corrupt, sidecar));
        }
        let log = EventLog::open(&path, config.fsync)?;
        info!(records = report.records, events = report.events, "replayed event log");
        Ok((Self::from_state(replay.state, log, config, clock), report))
    }

    pub fn from_state(state: ServiceState, log: EventLog, config: ServiceConfig, clock: Arc<dyn Clock>) -> Self {
        let rng = match config.seed {
            Some(seed) => StdRng::seed_from_u64(seed),
            None => StdRng::from_os_rng(),
        };
        let sessions = state
            .sessions
            .into_iter()
            .map(|(id, acc)| (id, Arc::new(Mutex::new(acc))))
            .collect();
        Self {
            config,
            clock,
            registry: RwLock::new(state.registry),
            sessions: RwLock::new(sessions),
            log: Mutex::new(log),
            events: AtomicU64::new(state.events),
            rng: Mutex::new(rng),
        }
    }

    pub fn config(&self) -> &ServiceConfig {
        &self.config
    }

    pub fn event_count(&self) -> u64 {
        self.events.load(Ordering::SeqCst)
    }

    pub fn health(&self) -> Health {
        Health {
            status: "ok".into(),
            events: self.event_count(),
        }
    }

    pub fn create_class(&self) -> Result<ClassCode, ServiceError> {
        let mut registry = self.registry.write().expect("registry lock poisoned");
        let record = {
            let mut rng = self.rng.lock().expect("rng lock poisoned");
            registry.propose_class(&mut *rng, self.clock.now_ms())?
        };
        self.append(&[record.clone().into()])?;
        registry.apply(&record)?;
        let RegistryRecord::ClassCreated { code, .. } = record else {
            unreachable!("propose_class returns ClassCreated")
        };
        Ok(code)
    }

    pub fn register_player(&self, code: &ClassCode, name: &str) -> Result<Registration, ServiceError> {
        let mut registry = self.registry.write().expect("registry lock poisoned");
        let record = {
            let mut rng = self.rng.lock().expect("rng lock poisoned");
            registry.propose_player(code, name, &mut *rng)?
        };
        self.append(&[record.clone().into()])?;
        registry.apply(&record)?;
        let RegistryRecord::PlayerRegistered { session_id, .. } = record else {
            unreachable!("propose_player returns PlayerRegistered")
        };
        self.sessions.write().expect("sessions lock poisoned").insert(
            session_id.clone(),
            Arc::new(Mutex::new(SessionAccumulator::new(session_id.clone(), 0))),
        );
        Ok(Registration {
            play_url: play_url(&self.config.play_base, &session_id),
            session_id,
        })
    }

    pub fn resolve_class(&self, session_id: &SessionId) -> Result<ClassCode, ServiceError> {
        Ok(self
            .registry
            .read()
            .expect("registry lock poisoned")
            .resolve_class(session_id)?)
    }

    /// Decodes a raw request body and ingests it.
    pub fn ingest(&self, request: IngestRequest) -> Result<IngestAck, ServiceError> {
        let events = request
            .events
            .into_iter()
            .enumerate()
            .map(|(i, v)| decode_value(v).map_err(|e| ServiceError::Malformed(format!("event {i}: {e}"))))
            .collect::<Result<Vec<_>, _>>()?;
        self.ingest_batch(&request.session_id, &events)
    }

    /// Skips events already applied, then logs and applies the rest as one
    /// unit: either every new event is acked or none is.
    pub fn ingest_batch(&self, session_id: &SessionId, events: &[GameEvent]) -> Result<IngestAck, ServiceError> {
        let cell = self
            .sessions
            .read()
            .expect("sessions lock poisoned")
            .get(session_id)
            .cloned()
            .ok_or_else(|| RegistryError::NotRegistered(session_id.clone()))?;
        if let Some(e) = events.iter().find(|e| &e.session_id != session_id) {
            return Err(ServiceError::Malformed(format!(
                "event seq {} belongs to session {}, not {session_id}",
                e.seq, e.session_id
            )));
        }
        if events.windows(2).any(|w| w[1].seq <= w[0].seq) {
            return Err(ServiceError::Malformed("batch is not in increasing seq order".into()));
        }

        let mut acc = cell.lock().expect("session lock poisoned");
        let last_seq = acc.last_seq;
        let fresh: Vec<&GameEvent> = events.iter().filter(|e| e.seq > last_seq).collect();
        if fresh.is_empty() {
            return Ok(IngestAck {
                session_id: session_id.clone(),
                last_seq,
            });
        }
        if let Some(gap) = fresh
            .iter()
            .enumerate()
            .find(|&(i, e)| e.seq != last_seq + 1 + i as u64)
            .map(|(_, e)| e.seq)
        {
            return Err(ServiceError::SequenceGap { last_seq, got: gap });
        }

        let received_at = self.clock.now_ms();
        let mut next = acc.clone();
        for e in &fresh {
            next.apply(e, received_at)
                .map_err(|err| ServiceError::Malformed(format!("event seq {}: {err}", e.seq)))?;
        }
        let records: Vec<LogRecord> = fresh
            .iter()
            .map(|&e| LogRecord::Event {
                received_at,
                event: e.clone(),
            })
            .collect();
        self.append(&records)?;
        *acc = next;
        self.events.fetch_add(fresh.len() as u64, Ordering::SeqCst);
        Ok(IngestAck {
            session_id: session_id.clone(),
            last_seq: acc.last_seq,
        })
    }

    /// Every roster member's panel, ranked against the class as it is at
    /// this moment. `at` overrides the clock used for idle indicators and
    /// playing time.
    pub fn class_dashboard(&self, code: &ClassCode, at: Option<u64>) -> Result<ClassDashboard, ServiceError> {
        let generated_at = self.clock.now_ms();
        let now = at.unwrap_or(generated_at);
        let registry = self.registry.read().expect("registry lock poisoned");
        let roster = registry.roster(code).ok_or(RegistryError::UnknownClass(*code))?;
        let accs: Vec<SessionAccumulator> = {
            let sessions = self.sessions.read().expect("sessions lock poisoned");
            roster
                .players
                .iter()
                .map(|p| sessions[&p.session_id].lock().expect("session lock poisoned").clone())
                .collect()
        };
        let snapshots = snapshot_class(&accs, now, &self.config.model);
        let players = roster
            .players
            .iter()
            .zip(accs.iter().zip(snapshots))
            .map(|(p, (acc, snapshot))| PlayerPanel {
                display_name: p.display_name.clone(),
                session_id: p.session_id.clone(),
                last_seq: acc.last_seq,
                snapshot,
            })
            .collect();
        Ok(ClassDashboard {
            code: *code,
            generated_at,
            poll_hint_s: self.config.poll_hint_s,
            players,
        })
    }

    fn append(&self, records: &[LogRecord]) -> Result<(), ServiceError> {
        self.log.lock().expect("log lock poisoned").append(records)?;
        Ok(())
    }
}

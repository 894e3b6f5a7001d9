//! Where simulated traffic goes: a JSONL file or a live telemetry service.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};
use std::thread;
use std::time::{Duration, Instant};

use lakeland_core::api::{ErrorBody, IngestAck, RegisterRequest, RegisterResponse};
use lakeland_core::{encode_event, ClassCode, GameEvent, SessionId};
use reqwest::blocking::Client;
use reqwest::StatusCode;
use tracing::warn;

use crate::config::SimConfig;
use crate::error::SimError;
use crate::runner::{ticks_per_batch, ClassSummary, PlayerStream};

pub trait Sink {
    /// One session id per player name, in order.
    fn allocate_sessions(&mut self, names: &[String], seed: u64) -> Result<Vec<SessionId>, SimError>;

    /// Delivers every stream. Returns, per player, the reason delivery was
    /// abandoned, or `None` if everything was accepted.
    fn deliver(&mut self, streams: &[PlayerStream], config: &SimConfig) -> Result<Vec<Option<String>>, SimError>;

    fn finish(&mut self, _summary: &ClassSummary) -> Result<(), SimError> {
        Ok(())
    }
}

/// Writes events in the wire format, one per line, interleaving players
/// batch by batch like live traffic. The ground-truth summary goes to a
/// `<stem>.truth.json` sidecar.
#[derive(Debug, Clone)]
pub struct FileSink {
    path: PathBuf,
}

impl FileSink {
    pub fn new(path: impl Into<PathBuf>) -> Self {
        Self { path: path.into() }
    }

    pub fn truth_path(&self) -> PathBuf {
        truth_path(&self.path)
    }
}

/// `runs/class.jsonl` -> `runs/class.truth.json`.
pub fn truth_path(events_path: &Path) -> PathBuf {
    let stem = events_path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "events".into());
    events_path.with_file_name(format!("{stem}.truth.json"))
}

impl Sink for FileSink {
    fn allocate_sessions(&mut self, names: &[String], seed: u64) -> Result<Vec<SessionId>, SimError> {
        Ok((0..names.len())
            .map(|i| SessionId::parse(&format!("sim-{seed:016x}-{:03}", i + 1)).expect("valid id"))
            .collect())
    }

    fn deliver(&mut self, streams: &[PlayerStream], _config: &SimConfig) -> Result<Vec<Option<String>>, SimError> {
        let mut out = BufWriter::new(File::create(&self.path)?);
        let mut cursors: Vec<std::slice::Iter<'_, crate::runner::Batch>> =
            streams.iter().map(|s| s.batches.iter()).collect();
        let mut pending: Vec<Option<&crate::runner::Batch>> = cursors.iter_mut().map(|c| c.next()).collect();
        // Emit batches in (first_tick, player) order.
        while let Some((i, batch)) = pending
            .iter()
            .enumerate()
            .filter_map(|(i, b)| b.map(|b| (i, b)))
            .min_by_key(|(i, b)| (b.first_tick, *i))
        {
            for e in &batch.events {
                writeln!(out, "{}", encode_event(e))?;
            }
            pending[i] = cursors[i].next();
        }
        out.flush()?;
        Ok(vec![None; streams.len()])
    }

    fn finish(&mut self, summary: &ClassSummary) -> Result<(), SimError> {
        let file = File::create(self.truth_path())?;
        serde_json::to_writer_pretty(BufWriter::new(file), summary)?;
        Ok(())
    }
}

/// Registers players with a running service and posts their batches, one
/// thread per player.
#[derive(Debug, Clone)]
pub struct HttpSink {
    base_url: String,
    class: ClassCode,
    client: Client,
    pub max_attempts: u32,
    pub backoff: Duration,
    /// When set, batches are sent on simulated time sped up by this factor
    /// (1.0 is real time). Otherwise they go out as fast as acks come back.
    pub pace: Option<f64>,
    /// Highest acked seq per session, updated as acks arrive.
    pub acks: Arc<Mutex<BTreeMap<SessionId, u64>>>,
}

impl HttpSink {
    pub fn new(base_url: &str, class: ClassCode) -> Result<Self, SimError> {
        let client = Client::builder()
            .timeout(Duration::from_secs(10))
            .build()
            .map_err(|e| SimError::SinkUnreachable(e.to_string()))?;
        Ok(Self {
            base_url: base_url.trim_end_matches('/').to_owned(),
            class,
            client,
            max_attempts: 5,
            backoff: Duration::from_millis(100),
            pace: None,
            acks: Arc::default(),
        })
    }

    fn with_retries<T>(&self, mut attempt: impl FnMut() -> Result<T, Retry>) -> Result<T, SimError> {
        let mut last = String::new();
        for n in 0..self.max_attempts {
            match attempt() {
                Ok(v) => return Ok(v),
                Err(Retry::Fatal(e)) => return Err(e),
                Err(Retry::Resume(last)) => {
                    return Err(SimError::SinkRejected(format!("unexpected resume at seq {last}")));
                }
                Err(Retry::Transient(msg)) => {
                    warn!(attempt = n + 1, "request failed: {msg}");
                    last = msg;
                    thread::sleep(self.backoff * 2u32.pow(n));
                }
            }
        }
        Err(SimError::SinkUnreachable(format!(
            "gave up after {} attempts: {last}",
            self.max_attempts
        )))
    }

    fn register(&self, name: &str) -> Result<SessionId, SimError> {
        let url = format!("{}/api/classes/{}/players", self.base_url, self.class);
        self.with_retries(|| {
            let resp = self
                .client
                .post(&url)
                .json(&RegisterRequest { name: name.to_owned() })
                .send()
                .map_err(|e| Retry::Transient(e.to_string()))?;
            let status = resp.status();
            if status.is_success() {
                let body: RegisterResponse = resp.json().map_err(|e| Retry::Transient(e.to_string()))?;
                return Ok(body.session_id);
            }
            Err(classify(status, resp.json::<ErrorBody>().ok()))
        })
    }

    /// Posts events with `seq > acked`, returning the new acked seq.
    fn post(&self, session_id: &SessionId, events: &[&GameEvent]) -> Result<u64, Retry> {
        let body = serde_json::json!({ "session_id": session_id, "events": events });
        let resp = self
            .client
            .post(format!("{}/api/ingest", self.base_url))
            .json(&body)
            .send()
            .map_err(|e| Retry::Transient(e.to_string()))?;
        let status = resp.status();
        if status.is_success() {
            let ack: IngestAck = resp.json().map_err(|e| Retry::Transient(e.to_string()))?;
            return Ok(ack.last_seq);
        }
        let err = resp.json::<ErrorBody>().ok();
        if status == StatusCode::CONFLICT {
            if let Some(last) = err.as_ref().and_then(|e| e.last_seq) {
                return Err(Retry::Resume(last));
            }
        }
        Err(classify(status, err))
    }

    fn deliver_one(&self, stream: &PlayerStream, config: &SimConfig, started: Instant) -> Result<(), SimError> {
        let events: Vec<&GameEvent> = stream.events().collect();
        let mut acked = 0u64;
        let mut sent_through = 0usize;
        for batch in &stream.batches {
            if let Some(speedup) = self.pace {
                // A batch is due once the ticks it covers have elapsed.
                let end_tick = batch.first_tick + ticks_per_batch(config);
                let due = Duration::from_secs_f64(end_tick as f64 * config.tick_s / speedup);
                if let Some(wait) = due.checked_sub(started.elapsed()) {
                    thread::sleep(wait);
                }
            }
            sent_through += batch.events.len();
            let mut attempts = 0;
            while acked < events[sent_through - 1].seq {
                let pending: Vec<&GameEvent> = events[..sent_through]
                    .iter()
                    .filter(|e| e.seq > acked)
                    .copied()
                    .collect();
                match self.post(&stream.plan.session_id, &pending) {
                    Ok(last) | Err(Retry::Resume(last)) if last <= acked => {
                        // No progress; resending would spin forever.
                        return Err(SimError::SinkRejected(format!(
                            "server acked seq {last} after acking {acked}"
                        )));
                    }
                    Ok(last) | Err(Retry::Resume(last)) => {
                        acked = last;
                        let mut acks = self.acks.lock().expect("ack map poisoned");
                        acks.insert(stream.plan.session_id.clone(), last);
                    }
                    Err(Retry::Fatal(e)) => return Err(e),
                    Err(Retry::Transient(msg)) => {
                        attempts += 1;
                        if attempts >= self.max_attempts {
                            return Err(SimError::SinkUnreachable(format!(
                                "gave up after {attempts} attempts: {msg}"
                            )));
                        }
                        warn!(session = %stream.plan.session_id, attempt = attempts, "ingest failed: {msg}");
                        thread::sleep(self.backoff * 2u32.pow(attempts - 1));
                    }
                }
            }
        }
        Ok(())
    }
}

enum Retry {
    Transient(String),
    /// The server acked up to this seq; resend from there.
    Resume(u64),
    Fatal(SimError),
}

fn classify(status: StatusCode, body: Option<ErrorBody>) -> Retry {
    let msg = match &body {
        Some(b) => format!("{status}: {} {}", b.error, b.message),
        None => status.to_string(),
    };
    if status.is_server_error() || status == StatusCode::TOO_MANY_REQUESTS {
        Retry::Transient(msg)
    } else {
        Retry::Fatal(SimError::SinkRejected(msg))
    }
}

impl Sink for HttpSink {
    fn allocate_sessions(&mut self, names: &[String], _seed: u64) -> Result<Vec<SessionId>, SimError> {
        names.iter().map(|n| self.register(n)).collect()
    }

    fn deliver(&mut self, streams: &[PlayerStream], config: &SimConfig) -> Result<Vec<Option<String>>, SimError> {
        let started = Instant::now();
        let this = &*self;
        let outcomes = thread::scope(|scope| {
            let handles: Vec<_> = streams
                .iter()
                .map(|stream| scope.spawn(move || this.deliver_one(stream, config, started)))
                .collect();
            handles
                .into_iter()
                .map(|h| match h.join() {
                    Ok(Ok(())) => None,
                    Ok(Err(e)) => Some(e.to_string()),
                    Err(_) => Some("delivery thread panicked".to_owned()),
                })
                .collect()
        });
        Ok(outcomes)
    }
}

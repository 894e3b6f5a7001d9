#![allow(dead_code)]

use std::io::{BufRead, BufReader, Read};
use std::path::Path;
use std::process::{Child, Command, Stdio};
use std::sync::Arc;
use std::thread::JoinHandle;

use lakeland_core::{ClassCode, SessionId};
use lakeland_service::server::run;
use lakeland_service::{ManualClock, ServiceConfig, TelemetryService};
use lakeland_sim::runner::{ticks_per_batch, ClassSummary, PlayerStream};
use lakeland_sim::{SimConfig, SimError, Sink};

/// The `lakeland-live` binary serving on an ephemeral port.
pub struct LiveServer {
    pub url: String,
    child: Child,
}

impl LiveServer {
    pub fn start(data_dir: &Path, extra: &[&str]) -> Self {
        let mut child = Command::new(env!("CARGO_BIN_EXE_lakeland-live"))
            .args(["serve", "--port", "0", "--data-dir"])
            .arg(data_dir)
            .args(extra)
            .env("RUST_LOG", "warn")
            .stdout(Stdio::piped())
            .stderr(Stdio::piped())
            .spawn()
            .expect("spawn lakeland-live");
        let mut line = String::new();
        BufReader::new(child.stdout.take().unwrap())
            .read_line(&mut line)
            .unwrap();
        let Some(url) = line.trim().strip_prefix("listening on ") else {
            let mut err = String::new();
            child.stderr.take().unwrap().read_to_string(&mut err).unwrap();
            panic!("server did not start: {line:?} {err}");
        };
        Self {
            url: url.to_owned(),
            child,
        }
    }

    /// SIGKILL, no graceful shutdown.
    pub fn kill(mut self) {
        self.child.kill().unwrap();
        self.child.wait().unwrap();
    }
}

impl Drop for LiveServer {
    fn drop(&mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

/// The router on a background runtime, for tests that do not need a
/// separate process.
pub struct InProcess {
    pub url: String,
    pub service: Arc<TelemetryService>,
    stop: Option<tokio::sync::oneshot::Sender<()>>,
    thread: Option<JoinHandle<()>>,
}

impl InProcess {
    pub fn start(service: TelemetryService) -> Self {
        let service = Arc::new(service);
        let (tx, rx) = tokio::sync::oneshot::channel::<()>();
        let (addr_tx, addr_rx) = std::sync::mpsc::channel();
        let svc = service.clone();
        let thread = std::thread::spawn(move || {
            let rt = tokio::runtime::Runtime::new().unwrap();
            rt.block_on(async move {
                let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
                addr_tx.send(listener.local_addr().unwrap()).unwrap();
                run(listener, svc, async {
                    let _ = rx.await;
                })
                .await
                .unwrap();
            });
        });
        let addr = addr_rx.recv().unwrap();
        Self {
            url: format!("http://{addr}"),
            service,
            stop: Some(tx),
            thread: Some(thread),
        }
    }
}

impl Drop for InProcess {
    fn drop(&mut self) {
        if let Some(tx) = self.stop.take() {
            let _ = tx.send(());
        }
        if let Some(t) = self.thread.take() {
            let _ = t.join();
        }
    }
}

pub const CLOCK_START: u64 = 1_700_000_000_000;

/// A service on a temp dir with a manual clock and seeded ids.
pub fn service_in(dir: &Path, config: ServiceConfig) -> (TelemetryService, Arc<ManualClock>) {
    let clock = Arc::new(ManualClock::new(CLOCK_START));
    let config = ServiceConfig {
        seed: config.seed.or(Some(7)),
        ..config
    };
    let (svc, _) = TelemetryService::open(dir, config, clock.clone()).unwrap();
    (svc, clock)
}

/// Feeds a simulation straight into an in-process service. Batches go in
/// (tick, player) order and the manual clock reads the simulated time at
/// which each batch would have been uploaded.
pub struct EngineSink<'a> {
    pub service: &'a TelemetryService,
    pub clock: &'a ManualClock,
    pub class: ClassCode,
    pub start_ms: u64,
}

impl Sink for EngineSink<'_> {
    fn allocate_sessions(&mut self, names: &[String], _seed: u64) -> Result<Vec<SessionId>, SimError> {
        names
            .iter()
            .map(|n| {
                self.service
                    .register_player(&self.class, n)
                    .map(|r| r.session_id)
                    .map_err(|e| SimError::SinkRejected(e.to_string()))
            })
            .collect()
    }

    fn deliver(&mut self, streams: &[PlayerStream], config: &SimConfig) -> Result<Vec<Option<String>>, SimError> {
        let per_batch = ticks_per_batch(config);
        let mut batches: Vec<(u64, usize, &lakeland_sim::runner::Batch)> = streams
            .iter()
            .enumerate()
            .flat_map(|(i, s)| s.batches.iter().map(move |b| (b.first_tick, i, b)))
            .collect();
        batches.sort_by_key(|&(t, i, _)| (t, i));
        for (tick, i, batch) in batches {
            let upload_ms = self.start_ms + config.tick_ms(tick + per_batch);
            self.clock.set(upload_ms.max(self.clock_now()));
            self.service
                .ingest_batch(&streams[i].plan.session_id, &batch.events)
                .map_err(|e| SimError::SinkRejected(e.to_string()))?;
        }
        Ok(vec![None; streams.len()])
    }

    fn finish(&mut self, _summary: &ClassSummary) -> Result<(), SimError> {
        Ok(())
    }
}

impl EngineSink<'_> {
    fn clock_now(&self) -> u64 {
        use lakeland_service::Clock;
        self.clock.now_ms()
    }
}

/// Removes the `"generated_at":N,` member from dashboard JSON text.
pub fn strip_generated_at(body: &str) -> String {
    let key = "\"generated_at\":";
    let Some(start) = body.find(key) else {
        return body.to_owned();
    };
    let end = start + body[start..].find(',').expect("more members follow") + 1;
    format!("{}{}", &body[..start], &body[end..])
}

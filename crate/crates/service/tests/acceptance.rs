//! Acceptance suite. Prints one PASS or FAIL line per criterion and exits
//! non-zero if any fails. An argument filters criteria by substring.
//!
//! `UPDATE_GOLDEN=1` rewrites the model-coverage golden file.

mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, OnceLock};
use std::time::{Duration, Instant, SystemTime, UNIX_EPOCH};

use common::{service_in, strip_generated_at, EngineSink, LiveServer, CLOCK_START};
use lakeland_core::api::ClassDashboard;
use lakeland_core::features::{
    percentile_rank, snapshot, IndicatorConfig, ModelConfig, ModelSnapshot, SessionAccumulator, MODEL_CATALOG,
};
use lakeland_core::{ClassCode, GameEvent, Payload, Produce, SessionId, TileGrid, TileKind};
use lakeland_service::{replay_file, ServiceConfig, LOG_FILE_NAME};
use lakeland_sim::runner::{plans, PlayerPlan, PlayerSim};
use lakeland_sim::{run_class_simulation, BotPolicy, HttpSink, PolicyMix, SimConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn main() -> ExitCode {
    let criteria: [Criterion; 7] = [
        ("model_coverage", model_coverage),
        ("percentile_oracle", percentile_oracle),
        ("detector_separation", detector_separation),
        ("indicator_boundary", indicator_boundary),
        ("durability_replay", durability_replay),
        ("desk_scale_load", desk_scale_load),
        ("simulator_conservation", simulator_conservation),
    ];
    let filter: Option<String> = std::env::args().skip(1).find(|a| !a.starts_with('-'));
    let mut failed = 0;
    for (name, run) in criteria {
        if filter.as_deref().is_some_and(|f| !name.contains(f)) {
            continue;
        }
        let t = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let secs = t.elapsed().as_secs_f64();
        match outcome {
            Ok(d) => println!("PASS {name} ({secs:.1}s): {d}"),
            Err(d) => {
                failed += 1;
                println!("FAIL {name} ({secs:.1}s): {d}");
            }
        }
    }
    if failed > 0 {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}

// ---- model coverage ----

/// Name, category and visualization of each dashboard model.
const EXPECTED_MODELS: [(&str, &str, &str); 16] = [
    ("Tutorials Completed", "Progress", "Number"),
    ("Tutorial Achievement Rank", "Progress", "Percentile"),
    ("Money Achievement Rank", "Progress", "Percentile"),
    ("Bloom Achievement Rank", "Progress", "Percentile"),
    ("Farm Achievement Rank", "Progress", "Percentile"),
    ("Population Achievement Rank", "Progress", "Percentile"),
    ("Playing Time", "Game State", "Minutes:Seconds"),
    ("Population", "Game State", "Icon + Number"),
    ("Map Summary", "Game State", "Bitmap"),
    ("Town Composition", "Strategy", "Icons + Numbers"),
    ("Diagonal Field Strategy Detector", "Strategy", "Binary Indicator"),
    ("Time Since Active", "Indecision", "Binary Indicator"),
    ("Time Since Last Building", "Indecision", "Binary Indicator"),
    ("Time Since Last Sale", "Frustration", "Binary Indicator"),
    ("Time Since Tile Exploration", "Give Up", "Binary Indicator"),
    ("Farmer Deaths", "Death", "Icon + Number"),
];

const SEEDED_AT: u64 = CLOCK_START + 630_000;

/// A 20-player, 600-tick seeded class run straight into a service, with
/// its dashboard evaluated at a fixed instant.
fn seeded_dashboard() -> &'static ClassDashboard {
    static DASH: OnceLock<ClassDashboard> = OnceLock::new();
    DASH.get_or_init(|| {
        let dir = tempfile::tempdir().unwrap();
        let (svc, clock) = service_in(dir.path(), ServiceConfig::default());
        let code = svc.create_class().unwrap();
        let mut sink = EngineSink {
            service: &svc,
            clock: &clock,
            class: code,
            start_ms: CLOCK_START,
        };
        run_class_simulation(
            &PolicyMix::default().assign(20),
            600,
            2024,
            &SimConfig::default(),
            &mut sink,
        )
        .unwrap();
        svc.class_dashboard(&code, Some(SEEDED_AT)).unwrap()
    })
}

fn golden_path() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden/model_coverage.json")
}

/// Why `value` is not a valid rendering of `visualization`, if it is not.
fn shape_error(visualization: &str, value: &serde_json::Value) -> Option<String> {
    let ok = match visualization {
        "Number" | "Icon + Number" => value.as_u64().is_some(),
        "Percentile" => value.as_f64().is_some_and(|p| p > 0.0 && p < 100.0),
        "Minutes:Seconds" => value.as_str().is_some_and(|s| {
            s.split_once(':').is_some_and(|(m, sec)| {
                !m.is_empty()
                    && m.bytes().all(|b| b.is_ascii_digit())
                    && sec.len() == 2
                    && sec.parse::<u8>().is_ok_and(|v| v < 60)
            })
        }),
        "Bitmap" => {
            let (w, h) = (value["width"].as_u64(), value["height"].as_u64());
            let rows = value["rows"].as_array();
            match (w, h, rows) {
                (Some(w), Some(h), Some(rows)) => {
                    value["palette_version"].is_u64()
                        && rows.len() as u64 == h
                        && rows.iter().all(|r| {
                            r.as_array().is_some_and(|r| {
                                r.len() as u64 == w
                                    && r.iter()
                                        .all(|c| c.as_u64().is_some_and(|c| c < TileKind::ALL.len() as u64))
                            })
                        })
                }
                _ => false,
            }
        }
        "Icons + Numbers" => value.as_object().is_some_and(|o| {
            let keys: Vec<&str> = o.keys().map(String::as_str).collect();
            keys == ["corn_fields", "dairy_farms", "houses"] && o.values().all(|v| v.as_u64().is_some())
        }),
        "Binary Indicator" => value.is_boolean(),
        other => return Some(format!("unknown visualization {other}")),
    };
    (!ok).then(|| format!("{value} is not a {visualization}"))
}

fn model_coverage() -> Outcome {
    let t = Instant::now();
    let mut problems = Vec::new();

    let catalog: Vec<(String, String, String)> = MODEL_CATALOG
        .iter()
        .map(|m| {
            let s = |v: serde_json::Value| v.as_str().unwrap().to_owned();
            (
                m.name.to_owned(),
                s(serde_json::to_value(m.category).unwrap()),
                s(serde_json::to_value(m.visualization).unwrap()),
            )
        })
        .collect();
    let expected: Vec<(String, String, String)> = EXPECTED_MODELS
        .iter()
        .map(|&(a, b, c)| (a.into(), b.into(), c.into()))
        .collect();
    if catalog != expected {
        problems.push("model catalog differs from the expected list".to_owned());
    }

    let dash = seeded_dashboard();
    let value = serde_json::to_value(dash).unwrap();
    let mut checked = 0;
    for panel in value["players"].as_array().unwrap() {
        if panel["last_seq"].as_u64() == Some(0) {
            continue;
        }
        checked += 1;
        let snap = panel["snapshot"].as_object().unwrap();
        let keys: BTreeSet<&str> = snap.keys().map(String::as_str).collect();
        let fields: BTreeSet<&str> = MODEL_CATALOG.iter().map(|m| m.field).collect();
        if snap.len() != 16 || keys != fields {
            problems.push(format!("{}: fields {keys:?}", panel["display_name"]));
            continue;
        }
        for (m, (_, _, vis)) in MODEL_CATALOG.iter().zip(&expected) {
            if let Some(e) = shape_error(vis, &snap[m.field]) {
                problems.push(format!("{} {}: {e}", panel["display_name"], m.field));
            }
        }
    }
    if checked != 20 {
        problems.push(format!("{checked} of 20 sessions had events"));
    }

    let json = serde_json::to_string_pretty(dash).unwrap() + "\n";
    let path = golden_path();
    let golden = if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::create_dir_all(path.parent().unwrap()).unwrap();
        std::fs::write(&path, &json).unwrap();
        "golden rewritten"
    } else {
        match std::fs::read_to_string(&path) {
            Ok(g) if strip_generated_at(&g) == strip_generated_at(&json) => "golden matches",
            Ok(_) => {
                problems.push(format!("dashboard differs from {}", path.display()));
                "golden differs"
            }
            Err(e) => {
                problems.push(format!("no golden file at {}: {e}", path.display()));
                "golden missing"
            }
        }
    };

    let elapsed = t.elapsed();
    if elapsed >= Duration::from_secs(5) {
        problems.push(format!("took {elapsed:?}, limit 5s"));
    }
    check(
        problems.is_empty(),
        if problems.is_empty() {
            format!("{checked} sessions x 16 models with the listed visualizations, {golden}, {elapsed:.2?}")
        } else {
            problems.join("; ")
        },
    )
}

// ---- percentile oracle ----

/// Sort the class, then count the run of equal values and what precedes it.
fn oracle_percentile(value: i64, class: &[i64]) -> f64 {
    let mut sorted = class.to_vec();
    sorted.sort();
    let first = sorted.iter().position(|&v| v == value).unwrap();
    let run = sorted[first..].iter().take_while(|&&v| v == value).count();
    (100 * (2 * first + run)) as f64 / (2 * sorted.len()) as f64
}

fn percentile_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5EED);
    let mut problems = Vec::new();
    let mut ranks = 0;
    let mut tied = 0;
    for set in 0..1000 {
        let n = rng.random_range(1..=50usize);
        // Narrow ranges force ties; wide ones mostly avoid them.
        let span = [1, 3, 10, 1000][set % 4];
        let class: Vec<i64> = (0..n).map(|_| rng.random_range(0..span) - span / 2).collect();
        let distinct: BTreeSet<i64> = class.iter().copied().collect();
        if distinct.len() < n {
            tied += 1;
        }
        let mut numerator_sum = 0usize;
        for &v in &class {
            let got = percentile_rank(&v, &class).unwrap();
            let want = oracle_percentile(v, &class);
            if got != want {
                problems.push(format!("set {set}: rank of {v} is {got}, oracle {want}"));
            }
            // got = 100 k / 2n exactly, so k can be recovered and summed.
            let k = (got * (2 * n) as f64 / 100.0).round() as usize;
            if (100 * k) as f64 / (2 * n) as f64 != got {
                problems.push(format!("set {set}: rank {got} is not a midrank"));
            }
            numerator_sum += k;
            ranks += 1;
        }
        // Mean rank = 100 * sum(k) / (2 n * n) = 50 exactly iff sum(k) = n^2.
        if numerator_sum != n * n {
            problems.push(format!(
                "set {set}: ranks sum to {numerator_sum}/{}, mean is not 50",
                n * n
            ));
        }
    }

    // The same identity on every ranked track of a real dashboard.
    let dash = seeded_dashboard();
    let n = dash.players.len();
    type Rank = fn(&ModelSnapshot) -> f64;
    let tracks: [(&str, Rank); 5] = [
        ("tutorial", |s| s.rank_tutorial),
        ("money", |s| s.rank_money),
        ("bloom", |s| s.rank_bloom),
        ("farm", |s| s.rank_farm),
        ("population", |s| s.rank_population),
    ];
    for (track, rank) in tracks {
        let sum: usize = dash
            .players
            .iter()
            .map(|p| (rank(&p.snapshot) * (2 * n) as f64 / 100.0).round() as usize)
            .sum();
        if sum != n * n {
            problems.push(format!(
                "dashboard track {track}: mean is {}",
                100.0 * sum as f64 / (2 * n * n) as f64
            ));
        }
    }

    check(
        problems.is_empty(),
        if problems.is_empty() {
            format!("{ranks} ranks over 1000 multisets ({tied} with ties) equal the oracle; all class means 50 exactly, incl. 5 dashboard tracks")
        } else {
            format!("{} mismatches, first: {}", problems.len(), problems[0])
        },
    )
}

// ---- detector separation ----

fn bot_plan(policy: BotPolicy, seed: u64) -> PlayerPlan {
    PlayerPlan {
        index: 0,
        name: "bot".into(),
        session_id: SessionId::parse(&format!("detector-{seed}")).unwrap(),
        policy,
        seed,
    }
}

/// Ticks at which the dashboard reports a diagonal strategy.
fn diagonal_reports(policy: BotPolicy, seed: u64, ticks: u64) -> Vec<u64> {
    let config = SimConfig::default();
    let cfg = ModelConfig::default();
    let plan = bot_plan(policy, seed);
    let (mut sim, start) = PlayerSim::new(&plan, &config).unwrap();
    let mut acc = SessionAccumulator::new(plan.session_id.clone(), 0);
    acc.apply(&start, start.t_ms).unwrap();
    let mut reports = Vec::new();
    for _ in 0..ticks {
        for e in sim.step() {
            acc.apply(&e, e.t_ms).unwrap();
        }
        let now = config.tick_ms(sim.world.tick);
        let snap = snapshot(&acc, now, std::slice::from_ref(&acc), &cfg).unwrap();
        if snap.diagonal_strategy {
            reports.push(sim.world.tick);
        }
    }
    reports
}

fn detector_separation() -> Outcome {
    let t = Instant::now();
    let mut correct = 0;
    let mut problems = Vec::new();
    let mut latest = 0;
    for seed in 0..20 {
        let diag = diagonal_reports(BotPolicy::DiagonalFarmer, seed, 60);
        match diag.first() {
            Some(&tick) => {
                correct += 1;
                latest = latest.max(tick);
            }
            None => problems.push(format!("diagonal seed {seed} not reported by tick 60")),
        }
        let grid = diagonal_reports(BotPolicy::GridFarmer, seed, 600);
        match grid.first() {
            None => correct += 1,
            Some(tick) => problems.push(format!("grid seed {seed} reported at tick {tick}")),
        }
    }
    let elapsed = t.elapsed();
    if elapsed >= Duration::from_secs(30) {
        problems.push(format!("took {elapsed:?}, limit 30s"));
    }
    check(
        correct == 40 && problems.is_empty(),
        if problems.is_empty() {
            format!("{correct}/40 correct, diagonal reported by tick {latest} at the latest, {elapsed:.2?}")
        } else {
            format!("{correct}/40 correct; {}", problems.join("; "))
        },
    )
}

// ---- indicator boundary ----

fn event(sid: &SessionId, seq: u64, payload: Payload) -> GameEvent {
    GameEvent {
        session_id: sid.clone(),
        seq,
        t_ms: seq * 1000,
        payload,
    }
}

/// One session per indicator; each does its indicator's activity once, at
/// `CLOCK_START + 1000`. Returns the instant of that activity.
fn boundary_once(indicators: IndicatorConfig) -> Result<u64, String> {
    let dir = tempfile::tempdir().unwrap();
    let config = ServiceConfig {
        model: ModelConfig {
            indicators,
            ..ModelConfig::default()
        },
        ..ServiceConfig::default()
    };
    let (svc, clock) = service_in(dir.path(), config);
    let code = svc.create_class().unwrap();
    let land = TileGrid::filled(4, 4, TileKind::LandEmpty).unwrap();
    let activities = [
        ("active", Payload::Input {}),
        (
            "building",
            Payload::Build {
                building: TileKind::House,
                x: 0,
                y: 0,
            },
        ),
        (
            "sale",
            Payload::Sell {
                produce: Produce::Corn,
                amount: 1,
                money: 5,
            },
        ),
        ("explore", Payload::TileInspect { x: 1, y: 1 }),
    ];
    let activity_at = CLOCK_START + 1000;
    let mut sids = Vec::new();
    for (name, payload) in activities {
        let sid = svc.register_player(&code, name).unwrap().session_id;
        clock.set(CLOCK_START);
        svc.ingest_batch(&sid, &[event(&sid, 1, Payload::SessionStart { grid: land.clone() })])
            .unwrap();
        clock.set(activity_at);
        svc.ingest_batch(&sid, &[event(&sid, 2, payload)]).unwrap();
        sids.push((name, sid));
    }
    // Later input must not reset the building, sale or explore clocks.
    clock.set(activity_at + 500);
    for (name, sid) in &sids[1..] {
        svc.ingest_batch(sid, &[event(sid, 3, Payload::Input {})])
            .map_err(|e| format!("{name}: {e}"))?;
    }

    let thresholds = [
        indicators.active_s,
        indicators.building_s,
        indicators.sale_s,
        indicators.explore_s,
    ];
    for (i, ((name, _), threshold_s)) in sids.iter().zip(thresholds).enumerate() {
        let boundary = activity_at + threshold_s * 1000;
        for (at, want) in [(boundary - 1, false), (boundary, false), (boundary + 1, true)] {
            let dash = svc.class_dashboard(&code, Some(at)).unwrap();
            let s = &dash.players[i].snapshot;
            let got = [s.idle_active, s.idle_building, s.idle_sale, s.idle_explore][i];
            if got != want {
                return Err(format!(
                    "idle_{name} with threshold {threshold_s}s is {got} at {} ms after the activity",
                    at - activity_at
                ));
            }
        }
    }
    Ok(activity_at)
}

fn indicator_boundary() -> Outcome {
    let configs = [
        IndicatorConfig::default(),
        IndicatorConfig {
            active_s: 45,
            building_s: 75,
            sale_s: 200,
            explore_s: 30,
        },
    ];
    let mut checked = Vec::new();
    for c in configs {
        boundary_once(c)?;
        checked.push(format!("{}/{}/{}/{}s", c.active_s, c.building_s, c.sale_s, c.explore_s));
    }
    Ok(format!(
        "all four indicators false at threshold and true at threshold+1 ms, thresholds {}",
        checked.join(" and ")
    ))
}

// ---- durability ----

fn now_ms() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).unwrap().as_millis() as u64
}

fn create_class(client: &reqwest::blocking::Client, url: &str) -> ClassCode {
    let body: serde_json::Value = client
        .post(format!("{url}/api/classes"))
        .send()
        .unwrap()
        .json()
        .unwrap();
    ClassCode::parse(body["code"].as_str().unwrap()).unwrap()
}

fn dashboard_text(client: &reqwest::blocking::Client, url: &str, code: &ClassCode, at: Option<u64>) -> String {
    let query = at.map(|at| format!("?at={at}")).unwrap_or_default();
    let resp = client
        .get(format!("{url}/api/classes/{code}/dashboard{query}"))
        .send()
        .unwrap();
    assert!(resp.status().is_success(), "dashboard status {}", resp.status());
    resp.text().unwrap()
}

fn durability_replay() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let client = reqwest::blocking::Client::new();
    let server = LiveServer::start(dir.path(), &[]);
    let code = create_class(&client, &server.url);
    let mut sink = HttpSink::new(&server.url, code).unwrap();
    let summary = run_class_simulation(
        &PolicyMix::default().assign(20),
        600,
        99,
        &SimConfig::default(),
        &mut sink,
    )
    .unwrap();
    let at = now_ms();
    let before = dashboard_text(&client, &server.url, &code, Some(at));
    let url = server.url.clone();
    server.kill();

    let server = LiveServer::start(dir.path(), &[]);
    assert_ne!(server.url, url, "restart should land on a fresh port");
    let after = dashboard_text(&client, &server.url, &code, Some(at));
    let events: usize = summary.players.iter().map(|p| p.events).sum();
    let (b, a) = (strip_generated_at(&before), strip_generated_at(&after));
    if b == a {
        Ok(format!(
            "{events} events from 20 players, {} dashboard bytes identical after SIGKILL and restart",
            b.len()
        ))
    } else {
        let at_byte = b
            .bytes()
            .zip(a.bytes())
            .position(|(x, y)| x != y)
            .unwrap_or(b.len().min(a.len()));
        Err(format!(
            "dashboards differ from byte {at_byte} (lengths {} vs {})",
            b.len(),
            a.len()
        ))
    }
}

// ---- desk-scale load ----

struct PollStats {
    latencies: Vec<Duration>,
    behind: Vec<String>,
}

/// Polls the dashboard until `done`, checking every panel against the
/// acks that had come back before each request went out.
fn poll_dashboard(
    url: &str,
    code: ClassCode,
    acks: Arc<std::sync::Mutex<BTreeMap<SessionId, u64>>>,
    done: &AtomicBool,
) -> PollStats {
    let client = reqwest::blocking::Client::new();
    let mut stats = PollStats {
        latencies: Vec::new(),
        behind: Vec::new(),
    };
    // (session, seq) -> when the ack was first seen without the panel showing it.
    let mut waiting: BTreeMap<SessionId, (u64, Instant)> = BTreeMap::new();
    let poll_hint = Duration::from_secs(5);
    while !done.load(Ordering::SeqCst) {
        let watermark = acks.lock().unwrap().clone();
        let t = Instant::now();
        let text = dashboard_text(&client, url, &code, None);
        stats.latencies.push(t.elapsed());
        let dash: ClassDashboard = serde_json::from_str(&text).unwrap();
        for p in &dash.players {
            let acked = watermark.get(&p.session_id).copied().unwrap_or(0);
            if p.last_seq >= acked {
                waiting.remove(&p.session_id);
                continue;
            }
            let since = waiting.entry(p.session_id.clone()).or_insert((acked, t)).1;
            if since.elapsed() > poll_hint {
                stats.behind.push(format!(
                    "{} still at seq {} more than 5s after seq {acked} was acked",
                    p.session_id, p.last_seq
                ));
            }
        }
        std::thread::sleep(Duration::from_millis(25));
    }
    stats
}

fn percentile(sorted: &[Duration], p: f64) -> Duration {
    let i = ((p * sorted.len() as f64).ceil() as usize).clamp(1, sorted.len()) - 1;
    sorted[i]
}

fn desk_scale_load() -> Outcome {
    const SPEEDUP: f64 = 20.0;
    let dir = tempfile::tempdir().unwrap();
    let client = reqwest::blocking::Client::new();
    let server = LiveServer::start(dir.path(), &[]);
    let code = create_class(&client, &server.url);
    let config = SimConfig {
        min_events_per_tick: 2,
        ..SimConfig::default()
    };
    let policies = "balanced:10,diagonal:5,grid:5".parse::<PolicyMix>().unwrap().assign(20);
    let mut sink = HttpSink::new(&server.url, code).unwrap();
    sink.pace = Some(SPEEDUP);
    let acks = sink.acks.clone();
    let done = AtomicBool::new(false);

    let (summary, stats) = std::thread::scope(|s| {
        let poller = s.spawn(|| poll_dashboard(&server.url, code, acks.clone(), &done));
        let summary = run_class_simulation(&policies, 600, 41, &config, &mut sink);
        done.store(true, Ordering::SeqCst);
        (summary, poller.join().unwrap())
    });
    let summary = summary.map_err(|e| format!("simulation failed: {e}"))?;

    let mut problems = Vec::new();
    let acked = acks.lock().unwrap().clone();
    let final_dash: ClassDashboard = serde_json::from_str(&dashboard_text(&client, &server.url, &code, None)).unwrap();
    let shown: BTreeMap<SessionId, u64> = final_dash
        .players
        .iter()
        .map(|p| (p.session_id.clone(), p.last_seq))
        .collect();
    let mut min_rate = f64::INFINITY;
    for p in &summary.players {
        if let Some(why) = &p.aborted {
            problems.push(format!("{} aborted: {why}", p.name));
        }
        let a = acked.get(&p.session_id).copied().unwrap_or(0);
        if a != p.events as u64 || shown.get(&p.session_id) != Some(&a) {
            problems.push(format!(
                "{}: {} events, {a} acked, {:?} shown",
                p.name,
                p.events,
                shown.get(&p.session_id)
            ));
        }
        min_rate = min_rate.min(p.events as f64 / 600.0);
    }
    if min_rate < 2.0 {
        problems.push(format!("slowest session sent {min_rate:.2} events/s"));
    }

    // Everything acked survives a crash.
    server.kill();
    let replay = replay_file(&dir.path().join(LOG_FILE_NAME)).unwrap();
    if replay.corrupt.is_some() {
        problems.push("log corrupt after kill".into());
    }
    let lost: Vec<&SessionId> = acked
        .iter()
        .filter(|(sid, &seq)| replay.state.sessions.get(*sid).map(|a| a.last_seq) != Some(seq))
        .map(|(sid, _)| sid)
        .collect();
    if !lost.is_empty() {
        problems.push(format!("acked events missing from the log for {lost:?}"));
    }

    let mut lat = stats.latencies.clone();
    lat.sort();
    if lat.is_empty() {
        problems.push("no dashboard polls completed".into());
    }
    let (p50, p99, max) = if lat.is_empty() {
        Default::default()
    } else {
        (percentile(&lat, 0.5), percentile(&lat, 0.99), *lat.last().unwrap())
    };
    if p99 >= Duration::from_millis(100) {
        problems.push(format!("dashboard p99 {p99:.1?}"));
    }
    problems.extend(stats.behind.iter().take(3).cloned());

    let total: usize = summary.players.iter().map(|p| p.events).sum();
    check(
        problems.is_empty(),
        if problems.is_empty() {
            format!(
                "20 sessions, {total} events ({min_rate:.2}+ events/s each), 0 acked lost, {} polls p50 {p50:.1?} p99 {p99:.1?} max {max:.1?}, no panel behind its acks",
                lat.len()
            )
        } else {
            problems.join("; ")
        },
    )
}

// ---- simulator conservation ----

fn simulator_conservation() -> Outcome {
    let config = SimConfig::default();
    let mut problems = Vec::new();
    let mut worst = 0.0f64;
    let mut runs = 0;
    let mut totals = (0u64, 0u64, 0u64);
    for class_seed in 0..5u64 {
        let ids: Vec<SessionId> = (0..20)
            .map(|i| SessionId::parse(&format!("cons-{class_seed}-{i}")).unwrap())
            .collect();
        for plan in plans(&PolicyMix::default().assign(20), ids, class_seed) {
            runs += 1;
            let (mut sim, start) = PlayerSim::new(&plan, &config).unwrap();
            let mut acc = SessionAccumulator::new(plan.session_id.clone(), 0);
            acc.apply(&start, start.t_ms).unwrap();
            for _ in 0..600 {
                let events = sim.step();
                let b = sim.balance();
                worst = worst.max(b.relative_error());
                if b.relative_error() > 1e-9 {
                    problems.push(format!(
                        "{} tick {}: balance off by {:e}",
                        plan.name,
                        sim.world.tick,
                        b.relative_error()
                    ));
                }
                // Counters are unsigned; a wrapped subtraction would show up as a huge value.
                let w = &sim.world;
                if [w.money, w.food, w.population].iter().any(|&v| v > u64::MAX / 2) {
                    problems.push(format!("{} tick {}: counter wrapped below zero", plan.name, w.tick));
                }
                for e in &events {
                    acc.apply(e, e.t_ms).unwrap();
                }
            }
            let truth = &sim.world.truth;
            let derived = (acc.deaths_total, acc.blooms_total, acc.tutorials_completed());
            let expected = (truth.deaths, truth.blooms, truth.tutorials.len() as u64);
            if derived != expected {
                problems.push(format!(
                    "{} seed {class_seed}: events give deaths/blooms/tutorials {derived:?}, truth {expected:?}",
                    plan.name
                ));
            }
            totals = (totals.0 + expected.0, totals.1 + expected.1, totals.2 + expected.2);
        }
    }
    check(
        problems.is_empty(),
        if problems.is_empty() {
            format!(
                "{runs} runs x 600 ticks, worst relative imbalance {worst:.1e}, no negatives, deaths/blooms/tutorials {}/{}/{} match truth",
                totals.0, totals.1, totals.2
            )
        } else {
            format!("{} problems, first: {}", problems.len(), problems[0])
        },
    )
}

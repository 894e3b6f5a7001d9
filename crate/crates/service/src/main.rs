use std::net::{IpAddr, SocketAddr};
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use lakeland_core::features::{IndicatorConfig, ModelConfig};
use lakeland_core::ClassCode;
use lakeland_service::server::{bind, run};
use lakeland_service::{replay_file, ServiceConfig, ServiceError, SystemClock, TelemetryService, LOG_FILE_NAME};
use lakeland_sim::{run_class_simulation, FileSink, HttpSink, PolicyMix, SimConfig, Sink};
use tracing::info;
use tracing_subscriber::EnvFilter;

#[derive(Debug, Parser)]
#[command(
    name = "lakeland-live",
    version,
    about = "Live classroom dashboards for Lakeland game telemetry"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Replay the log in the data directory, then serve the HTTP API.
    Serve(ServeArgs),
    /// Replay the log offline and print a summary.
    Replay(ReplayArgs),
    /// Run a seeded class of bot players against a service or into a file.
    Simulate(SimulateArgs),
}

#[derive(Debug, Args)]
struct ServeArgs {
    #[arg(long, default_value_t = 8080)]
    port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    host: IpAddr,
    #[arg(long, env = "LAKELAND_LIVE_DATA_DIR")]
    data_dir: PathBuf,
    #[arg(long, default_value_t = 60)]
    active_s: u64,
    #[arg(long, default_value_t = 120)]
    building_s: u64,
    #[arg(long, default_value_t = 180)]
    sale_s: u64,
    #[arg(long, default_value_t = 120)]
    explore_s: u64,
    #[arg(long, default_value_t = 5)]
    poll_s: u64,
    /// Base URL of the game; players get `<base>/play?session=<id>`.
    #[arg(long)]
    play_base: Option<String>,
    /// fsync the log after every append.
    #[arg(long)]
    fsync: bool,
}

#[derive(Debug, Args)]
struct ReplayArgs {
    #[arg(long, env = "LAKELAND_LIVE_DATA_DIR")]
    data_dir: PathBuf,
    /// Only verify the log; exit non-zero if it is corrupt.
    #[arg(long)]
    check: bool,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[arg(long)]
    players: usize,
    #[arg(long)]
    duration_ticks: u64,
    #[arg(long)]
    seed: u64,
    /// Base URL of a running service.
    #[arg(long, requires = "class", conflicts_with = "out")]
    target: Option<String>,
    #[arg(long)]
    class: Option<String>,
    /// Write the wire-format events here instead of posting them.
    #[arg(long, required_unless_present = "target")]
    out: Option<PathBuf>,
    #[arg(long, default_value = "balanced:10,diagonal:4,grid:3,idler:2,quitter:1")]
    policy_mix: PolicyMix,
    /// Pace uploads on simulated time, sped up by this factor.
    #[arg(long)]
    pace: Option<f64>,
    /// Pad every online tick to at least this many events.
    #[arg(long, default_value_t = 0)]
    min_events_per_tick: usize,
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(EnvFilter::try_from_default_env().unwrap_or_else(|_| EnvFilter::new("info")))
        .with_writer(std::io::stderr)
        .init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Serve(args) => serve(args),
        Command::Replay(args) => replay(args),
        Command::Simulate(args) => simulate(args),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn serve(args: ServeArgs) -> anyhow::Result<ExitCode> {
    let indicators = IndicatorConfig {
        active_s: args.active_s,
        building_s: args.building_s,
        sale_s: args.sale_s,
        explore_s: args.explore_s,
    };
    indicators.validate()?;
    let runtime = tokio::runtime::Runtime::new()?;
    runtime.block_on(async move {
        let addr = SocketAddr::new(args.host, args.port);
        let listener = match bind(addr).await {
            Ok(l) => l,
            Err(e) => {
                eprintln!("{}: {e}", e.code());
                return Ok(ExitCode::from(2));
            }
        };
        let local = listener.local_addr()?;
        let config = ServiceConfig {
            model: ModelConfig {
                indicators,
                ..ModelConfig::default()
            },
            poll_hint_s: args.poll_s,
            play_base: args.play_base.unwrap_or_else(|| format!("http://{local}")),
            fsync: args.fsync,
            seed: None,
        };
        // Replay finishes before the first connection is accepted.
        let (service, report) = match TelemetryService::open(&args.data_dir, config, Arc::new(SystemClock)) {
            Ok(v) => v,
            Err(e @ ServiceError::DataDirUnwritable { .. }) => {
                eprintln!("{}: {e}", e.code());
                return Ok(ExitCode::from(3));
            }
            Err(e) => return Err(e.into()),
        };
        info!(records = report.records, "replay complete");
        println!("listening on http://{local}");
        run(listener, Arc::new(service), shutdown_signal()).await?;
        Ok(ExitCode::SUCCESS)
    })
}

async fn shutdown_signal() {
    let _ = tokio::signal::ctrl_c().await;
}

fn replay(args: ReplayArgs) -> anyhow::Result<ExitCode> {
    let path = args.data_dir.join(LOG_FILE_NAME);
    let replay = replay_file(&path).with_context(|| format!("reading {}", path.display()))?;
    let state = &replay.state;
    println!("log: {}", path.display());
    println!("records: {}", replay.records);
    println!("classes: {}", state.registry.rosters().len());
    println!("players: {}", state.registry.player_count());
    println!("events: {}", state.events);
    for roster in state.registry.rosters() {
        let started = roster
            .players
            .iter()
            .filter(|p| state.sessions[&p.session_id].is_started())
            .count();
        println!(
            "  class {}: {} players, {} started",
            roster.code,
            roster.players.len(),
            started
        );
    }
    match replay.corrupt {
        Some(c) => {
            println!("CORRUPT_LOG: line {}: {}", c.line, c.reason);
            Ok(ExitCode::FAILURE)
        }
        None => {
            if args.check {
                println!("ok");
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn simulate(args: SimulateArgs) -> anyhow::Result<ExitCode> {
    let config = SimConfig {
        min_events_per_tick: args.min_events_per_tick,
        ..SimConfig::default()
    };
    let policies = args.policy_mix.assign(args.players);
    let mut sink: Box<dyn Sink> = match (&args.target, &args.out) {
        (Some(target), _) => {
            let class = args.class.as_deref().context("--target needs --class")?;
            let class = ClassCode::parse(class).with_context(|| format!("bad class code {class:?}"))?;
            let mut sink = HttpSink::new(target, class)?;
            sink.pace = args.pace;
            Box::new(sink)
        }
        (None, Some(out)) => Box::new(FileSink::new(out)),
        (None, None) => bail!("one of --target or --out is required"),
    };
    let summary = run_class_simulation(&policies, args.duration_ticks, args.seed, &config, sink.as_mut())?;
    println!("{}", serde_json::to_string_pretty(&summary)?);
    if let Some(out) = &args.out {
        info!(events = %out.display(), truth = %lakeland_sim::sink::truth_path(out).display(), "wrote simulation");
    }
    let aborted = summary.players.iter().filter(|p| p.aborted.is_some()).count();
    if aborted > 0 {
        eprintln!("{aborted} players could not be delivered");
        return Ok(ExitCode::FAILURE);
    }
    Ok(ExitCode::SUCCESS)
}

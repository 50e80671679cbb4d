use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use chrono::{Local, NaiveDate, NaiveDateTime, SubsecRound};
use clap::{Parser, Subcommand, ValueEnum};

use remind_core::clock::Seconds;
use remind_core::home::{load_home_config, HomeConfig};
use remind_core::intent::AuthoringContext;
use remind_core::simulator::{evaluate_corpus, load_corpus_dir, render_report, Trace};
use remindd::commands::{self, backend_factory};
use remindd::{router, AppState, ClockMode, EngineConfig};

#[derive(Parser)]
#[command(name = "remindd", version, about = "Context-aware smart-home reminders")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Clock {
    Wall,
    Virtual,
}

#[derive(Subcommand)]
enum Command {
    /// Run the HTTP service.
    Serve {
        /// Home configuration JSON; the bundled sample home when omitted.
        #[arg(long)]
        home: Option<PathBuf>,
        #[arg(long, default_value = "data")]
        data: PathBuf,
        #[arg(long, value_enum, default_value = "wall")]
        clock: Clock,
        #[arg(long, default_value = "1s", value_parser = parse_seconds)]
        tick: u64,
        #[arg(long, default_value_t = 8787)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        /// Virtual clock start, `YYYY-MM-DDTHH:MM:SS`; now when omitted.
        #[arg(long)]
        start: Option<NaiveDateTime>,
    },
    /// Replay a trace against stored reminders and print the notifications.
    Simulate {
        #[arg(long)]
        home: Option<PathBuf>,
        #[arg(long)]
        trace: PathBuf,
        /// Data directory or directory of reminder documents.
        #[arg(long)]
        reminders: PathBuf,
        #[arg(long, default_value = "1s", value_parser = parse_seconds)]
        tick: u64,
        /// Cross-check every reminder against the brute-force evaluator.
        #[arg(long)]
        oracle: bool,
    },
    /// Author one reminder in the terminal.
    Author {
        #[arg(long)]
        home: Option<PathBuf>,
        /// Save the finished reminder into this data directory.
        #[arg(long)]
        data: Option<PathBuf>,
    },
    /// Run the scripted corpus and report per-scenario scores.
    Eval {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        home: Option<PathBuf>,
        /// Date the sessions happen on and traces are moved to; today when omitted.
        #[arg(long)]
        date: Option<NaiveDate>,
        #[arg(long, default_value = "1s", value_parser = parse_seconds)]
        tick: u64,
        /// Seconds an actual firing may be off from the expected one.
        #[arg(long, default_value_t = 1)]
        tolerance: u64,
        /// Also write the report as JSON here.
        #[arg(long)]
        json: Option<PathBuf>,
    },
}

fn parse_seconds(s: &str) -> Result<u64, String> {
    Seconds::parse(s)
        .map(Seconds::get)
        .ok_or_else(|| format!("expected a duration like 1s, 5m or 1h, got {s:?}"))
}

fn load_home(path: Option<&Path>) -> Result<HomeConfig, String> {
    match path {
        None => Ok(HomeConfig::sample_home()),
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| format!("{}: {e}", p.display()))?;
            load_home_config(&text).map_err(|e| format!("{}: {e}", p.display()))
        }
    }
}

fn now() -> NaiveDateTime {
    Local::now().naive_local().trunc_subsecs(0)
}

async fn serve(
    home: HomeConfig,
    data: PathBuf,
    clock: ClockMode,
    tick: u64,
    addr: SocketAddr,
) -> Result<(), String> {
    let mut cfg = EngineConfig::new(home.clone(), data, clock);
    cfg.tick = tick;
    let (engine, join) = remindd::start(&cfg).map_err(|e| e.to_string())?;
    let state = AppState::new(engine.clone(), home.clone(), backend_factory(&home));
    let listener = tokio::net::TcpListener::bind(addr)
        .await
        .map_err(|e| format!("{addr}: {e}"))?;
    eprintln!("remindd listening on http://{addr}");
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
        .map_err(|e| e.to_string())?;
    engine.shutdown().await.map_err(|e| e.to_string())?;
    let _ = join.join();
    Ok(())
}

fn run(cli: Cli) -> Result<bool, String> {
    match cli.command {
        Command::Serve {
            home,
            data,
            clock,
            tick,
            port,
            host,
            start,
        } => {
            let home = load_home(home.as_deref())?;
            let clock = match clock {
                Clock::Wall => ClockMode::Wall,
                Clock::Virtual => ClockMode::Virtual {
                    start: start.unwrap_or_else(now),
                },
            };
            let addr: SocketAddr = format!("{host}:{port}")
                .parse()
                .map_err(|e| format!("{host}:{port}: {e}"))?;
            tokio::runtime::Runtime::new()
                .map_err(|e| e.to_string())?
                .block_on(serve(home, data, clock, tick, addr))?;
            Ok(true)
        }
        Command::Simulate {
            home,
            trace,
            reminders,
            tick,
            oracle,
        } => {
            let home = load_home(home.as_deref())?;
            let text =
                std::fs::read_to_string(&trace).map_err(|e| format!("{}: {e}", trace.display()))?;
            let trace = Trace::from_jsonl(&text).map_err(|e| e.to_string())?;
            let stored = commands::load_reminders(&reminders)
                .map_err(|e| format!("{}: {e}", reminders.display()))?;
            let out = commands::simulate(&home, &trace, &stored, tick, oracle)?;
            for n in &out.notifications {
                println!("{}", serde_json::to_string(n).map_err(|e| e.to_string())?);
            }
            for m in &out.mismatches {
                eprintln!(
                    "oracle mismatch for {}: engine {:?}, oracle {:?}",
                    m.reminder_id, m.engine, m.oracle
                );
            }
            if oracle {
                eprintln!("oracle: {} mismatching reminder(s)", out.mismatches.len());
            }
            Ok(out.mismatches.is_empty())
        }
        Command::Author { home, data } => {
            let home = load_home(home.as_deref())?;
            let mut backend = backend_factory(&home)();
            let stdin = std::io::stdin();
            let mut input = stdin.lock();
            let mut output = std::io::stdout();
            let done = commands::author(
                &home,
                backend.as_mut(),
                &mut input,
                &mut output,
                now,
                data.as_deref(),
            )
            .map_err(|e| e.to_string())?;
            Ok(done.is_some())
        }
        Command::Eval {
            corpus,
            home,
            date,
            tick,
            tolerance,
            json,
        } => {
            let home = load_home(home.as_deref())?;
            let fixtures =
                load_corpus_dir(&corpus).map_err(|e| format!("{}: {e}", corpus.display()))?;
            let date = date.unwrap_or_else(|| now().date());
            let ctx = AuthoringContext::new(date.and_hms_opt(9, 0, 0).expect("valid time"));
            let report = evaluate_corpus(&fixtures, &home, &ctx, tick, tolerance);
            print!("{}", render_report(&report));
            if let Some(path) = json {
                let text = serde_json::to_string_pretty(&report).map_err(|e| e.to_string())?;
                std::fs::write(&path, text).map_err(|e| format!("{}: {e}", path.display()))?;
            }
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("remindd: {e}");
            ExitCode::from(2)
        }
    }
}

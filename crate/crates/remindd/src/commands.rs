//! The non-serving CLI commands, kept here so tests can call them directly.

use std::io::{BufRead, Write};
use std::path::Path;
use std::sync::Arc;

use chrono::NaiveDateTime;

use remind_core::authoring::{handle_user_message, AssistantBackend, FallbackBackend, Session, Stage};
use remind_core::dsl;
use remind_core::home::HomeConfig;
use remind_core::intent::AuthoringContext;
use remind_core::runtime::{Notification, RuntimeReminder};
use remind_core::simulator::{apply_arming, brute_force_oracle, run_simulation, Trace};

use crate::api::BackendFactory;
use crate::llm::{LlmConfig, RemoteBackend};
use crate::store::{load_reminder_dir, Status, Store, StoredReminder};

/// The remote backend when `REMIND_LLM_*` is configured, else the rule-based one.
pub fn backend_factory(home: &HomeConfig) -> BackendFactory {
    let home = home.clone();
    match LlmConfig::from_env() {
        Some(cfg) => Arc::new(move || -> Box<dyn AssistantBackend + Send> {
            match RemoteBackend::new(cfg.clone(), home.clone()) {
                Ok(b) => Box::new(b),
                Err(_) => Box::new(FallbackBackend::new(home.clone())),
            }
        }),
        None => Arc::new(move || -> Box<dyn AssistantBackend + Send> {
            Box::new(FallbackBackend::new(home.clone()))
        }),
    }
}

/// Reads reminders from either a data directory (with a `reminders/`
/// subdirectory) or a directory of reminder documents.
pub fn load_reminders(dir: &Path) -> std::io::Result<Vec<StoredReminder>> {
    let nested = dir.join("reminders");
    load_reminder_dir(if nested.is_dir() { &nested } else { dir })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mismatch {
    pub reminder_id: String,
    pub engine: Vec<NaiveDateTime>,
    pub oracle: Vec<NaiveDateTime>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationOutput {
    pub notifications: Vec<Notification>,
    /// Filled only when the oracle was requested.
    pub mismatches: Vec<Mismatch>,
}

/// Replays `trace` against every stored reminder that is not deleted, each
/// from a fresh state.
pub fn simulate(
    home: &HomeConfig,
    trace: &Trace,
    stored: &[StoredReminder],
    tick: u64,
    oracle: bool,
) -> Result<SimulationOutput, String> {
    let mut runtime = Vec::new();
    for s in stored.iter().filter(|s| s.status != Status::Deleted) {
        let program = dsl::parse(&s.dsl).map_err(|e| format!("{}: {e}", s.id))?;
        let program = dsl::typecheck(&program, home).map_err(|errs| {
            format!(
                "{}: {}",
                s.id,
                errs.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
            )
        })?;
        runtime.push(RuntimeReminder::new(s.id.clone(), s.intent.clone(), program));
    }
    let checks: Vec<RuntimeReminder> = if oracle { runtime.clone() } else { Vec::new() };
    let notifications = run_simulation(home, runtime, trace, tick).map_err(|e| e.to_string())?;
    let mut mismatches = Vec::new();
    for r in checks {
        let raw: Vec<NaiveDateTime> = brute_force_oracle(&r.program.root, trace, tick)
            .into_iter()
            .map(|o| trace.time_of(o))
            .collect();
        let expected = apply_arming(&raw, &r.intent);
        let got: Vec<NaiveDateTime> = notifications
            .iter()
            .filter(|n| n.reminder_id == r.id)
            .map(|n| n.fired_at)
            .collect();
        if got != expected {
            mismatches.push(Mismatch {
                reminder_id: r.id.clone(),
                engine: got,
                oracle: expected,
            });
        }
    }
    Ok(SimulationOutput {
        notifications,
        mismatches,
    })
}

/// Terminal chat. Returns the stored reminder when the session finished.
pub fn author(
    home: &HomeConfig,
    backend: &mut dyn AssistantBackend,
    input: &mut dyn BufRead,
    output: &mut dyn Write,
    now: impl Fn() -> NaiveDateTime,
    data: Option<&Path>,
) -> std::io::Result<Option<StoredReminder>> {
    let mut session = Session::new("terminal");
    writeln!(output, "assistant: What would you like to be reminded about?")?;
    let mut line = String::new();
    while !session.stage.is_closed() {
        write!(output, "you: ")?;
        output.flush()?;
        line.clear();
        if input.read_line(&mut line)? == 0 {
            break;
        }
        if line.trim().is_empty() {
            continue;
        }
        let ctx = AuthoringContext::new(now());
        match handle_user_message(&mut session, line.trim(), home, &ctx, backend) {
            Ok(reply) => writeln!(output, "assistant: {reply}")?,
            Err(e) => {
                writeln!(output, "error: {e}")?;
                break;
            }
        }
    }
    if session.stage != Stage::Done {
        return Ok(None);
    }
    let Some(c) = session.emitted.as_ref() else {
        return Ok(None);
    };
    let stored = StoredReminder::from_compiled(c);
    writeln!(output, "trigger: {} ({})", stored.dsl, stored.kind)?;
    if let Some(dir) = data {
        Store::open(dir)?.save_reminder(&stored)?;
        writeln!(output, "saved: {}", stored.id)?;
    }
    Ok(Some(stored))
}

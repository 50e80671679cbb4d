//! Deterministic replay of recorded or synthetic home traces.

mod corpus;
pub mod oracle;
mod trace;

use chrono::{Datelike, NaiveDate, NaiveDateTime};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dsl::Event;
use crate::home::HomeConfig;
use crate::intent::{Recurrence, ReminderIntent};
use crate::runtime::{self, Blackboard, Engine, Notification, RuntimeError, RuntimeReminder, Tick};

pub use corpus::{evaluate_corpus, load_corpus_dir, render_report, CorpusFixture, CorpusReport, ScenarioRow};
pub use oracle::brute_force_oracle;
pub use trace::{Trace, TraceEvent, TraceKind, TraceTime};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("trace line {line}: {reason}")]
    MalformedTrace { line: usize, reason: String },
    #[error("trace event {index} is earlier than the one before it")]
    UnsortedTrace { index: usize },
    #[error("trace event {index} is past the trace duration")]
    EventAfterEnd { index: usize },
    #[error("trace refers to unknown sensor `{0}`")]
    UnknownSensorInTrace(String),
    #[error("trace refers to unknown activity `{0}`")]
    UnknownActivityInTrace(String),
    #[error("tick interval must be positive")]
    ZeroInterval,
    #[error(transparent)]
    Runtime(#[from] RuntimeError),
}

/// Replays a trace through an engine holding `reminders`.
pub fn run_simulation(
    home: &HomeConfig,
    reminders: Vec<RuntimeReminder>,
    trace: &Trace,
    interval: u64,
) -> Result<Vec<Notification>, SimError> {
    if interval == 0 {
        return Err(SimError::ZeroInterval);
    }
    trace.validate(home)?;
    let mut engine = Engine::new(home.clone());
    for r in reminders {
        engine.add(r)?;
    }
    let mut out = Vec::new();
    let mut next = 0;
    for offset in trace.tick_offsets(interval) {
        let now = trace.time_of(offset);
        while next < trace.events.len() && trace.offset_of(trace.events[next].t) <= offset {
            let e = &trace.events[next];
            match e.kind {
                TraceKind::Sensor => {
                    let v = e.value.expect("validated");
                    engine.ingest([(e.target.as_str(), v)])?;
                }
                TraceKind::Activity => {
                    engine.set_activity(e.activity_label(), trace.time_of(trace.offset_of(e.t)))?
                }
            }
            next += 1;
        }
        out.extend(engine.step(now)?);
    }
    Ok(out)
}

/// Raw fire offsets of a program under the incremental evaluator, with no
/// recurrence policy. This is what the oracle is compared against.
pub fn incremental_fire_offsets(program: &Event, trace: &Trace, interval: u64) -> Vec<i64> {
    let mut bb = Blackboard::default();
    let mut snapshot = std::collections::BTreeMap::new();
    let mut activity = runtime::ActivityState::default();
    let mut next = 0;
    let mut out = Vec::new();
    for offset in trace.tick_offsets(interval) {
        while next < trace.events.len() && trace.offset_of(trace.events[next].t) <= offset {
            let e = &trace.events[next];
            match e.kind {
                TraceKind::Sensor => {
                    if let Some(v) = e.value {
                        snapshot.insert(e.target.clone(), v);
                    }
                }
                TraceKind::Activity => {
                    activity.current = e.activity_label().map(str::to_string);
                }
            }
            next += 1;
        }
        let tick = Tick {
            now: trace.time_of(offset),
            snapshot: snapshot.clone(),
            activity: activity.clone(),
        };
        if runtime::evaluate_program(program, &tick, &mut bb) {
            out.push(offset);
        }
    }
    out
}

/// Filters raw fire times through a reminder's recurrence and date policy.
/// Written independently of the engine's arming so the two can be compared.
pub fn apply_arming(raw: &[NaiveDateTime], intent: &ReminderIntent) -> Vec<NaiveDateTime> {
    let only_on: Option<NaiveDate> = intent.resolved_date();
    let mut out: Vec<NaiveDateTime> = Vec::new();
    for &t in raw {
        if only_on.is_some_and(|d| d != t.date()) {
            continue;
        }
        let same_day = out.last().is_some_and(|p| p.date() == t.date());
        let keep = match intent.recurrence {
            Recurrence::Once => out.is_empty(),
            Recurrence::Daily => !same_day,
            Recurrence::Weekly(day) => t.weekday() == day && !same_day,
        };
        if keep {
            out.push(t);
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScoreLabel {
    Correct,
    PartiallyCorrect,
    Incorrect,
}

impl ScoreLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            ScoreLabel::Correct => "correct",
            ScoreLabel::PartiallyCorrect => "partially_correct",
            ScoreLabel::Incorrect => "incorrect",
        }
    }
}

/// Number of expected firings matched by distinct actual firings within
/// `tolerance` seconds, matching greedily in time order.
pub fn matched_firings(expected: &[i64], actual: &[i64], tolerance: u64) -> usize {
    let mut e = expected.to_vec();
    let mut a = actual.to_vec();
    e.sort_unstable();
    a.sort_unstable();
    let tol = tolerance as i64;
    let (mut i, mut j, mut matched) = (0, 0, 0);
    while i < e.len() && j < a.len() {
        if (e[i] - a[j]).abs() <= tol {
            matched += 1;
            i += 1;
            j += 1;
        } else if a[j] < e[i] {
            j += 1;
        } else {
            i += 1;
        }
    }
    matched
}

pub fn score_run(expected: &[i64], actual: &[i64], tolerance: u64) -> ScoreLabel {
    let matched = matched_firings(expected, actual, tolerance);
    if matched == expected.len() && matched == actual.len() {
        ScoreLabel::Correct
    } else if matched > 0 {
        ScoreLabel::PartiallyCorrect
    } else {
        ScoreLabel::Incorrect
    }
}

//! Conversational authoring: the ask/confirm/finalize session machine and
//! the deterministic intent compiler.
//!
//! Backends only read slot values and phrase replies. Parsing, feasibility,
//! validation and compilation all happen here, so no backend can produce a
//! reminder that was not checked.

mod backend;
mod script;

use chrono::NaiveDateTime;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dsl::{self, TriggerKind, ValidatedProgram};
use crate::feasibility::{check_feasibility, ReasonCode, Suggestion};
use crate::home::HomeConfig;
use crate::intent::{
    self, compile_when, extract_slots, normalize_intent, parse_time_expression,
    render_intent_sentence, when_slot_value, AuthoringContext, IntentError, RawSlots,
    ReminderIntent, Slot, WhenSpec,
};

pub use backend::{
    fallback_reply, question_count, AssistantBackend, BackendError, FallbackBackend, Guide,
    ScriptedBackend,
};
pub use script::{load_script, run_scripted_session, ScriptEntry, ScriptOutcome};

pub const DEFAULT_MAX_ATTEMPTS: u32 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Ask,
    Confirm,
    Finalize,
    Done,
    Abandoned,
}

impl Stage {
    pub fn as_str(self) -> &'static str {
        match self {
            Stage::Ask => "ask",
            Stage::Confirm => "confirm",
            Stage::Finalize => "finalize",
            Stage::Done => "done",
            Stage::Abandoned => "abandoned",
        }
    }

    pub fn is_closed(self) -> bool {
        matches!(self, Stage::Done | Stage::Abandoned)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    User,
    Assistant,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Turn {
    pub role: Role,
    pub text: String,
    pub timestamp: NaiveDateTime,
    /// Stage the session was in when the turn was produced.
    pub stage: Stage,
}

/// A validated reminder ready for the runtime.
#[derive(Debug, Clone, PartialEq)]
pub struct CompiledReminder {
    pub intent: ReminderIntent,
    pub program: ValidatedProgram,
    pub kind: TriggerKind,
}

impl CompiledReminder {
    pub fn dsl(&self) -> String {
        dsl::format(&self.program)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AuthoringError {
    #[error("session is closed")]
    SessionClosed,
    #[error("not detectable in this home ({code:?}): {reason}")]
    InfeasibleIntent { code: ReasonCode, reason: String },
    #[error("trigger does not compile: {0}")]
    CompileError(String),
    #[error("script diverged at turn {turn}: {detail}")]
    ScriptDivergence { turn: usize, detail: String },
    #[error("malformed script: {0}")]
    MalformedScript(String),
}

/// Deterministic intent to program lowering.
pub fn compile_intent(
    intent: &ReminderIntent,
    home: &HomeConfig,
) -> Result<CompiledReminder, AuthoringError> {
    let verdict = check_feasibility(&intent.when_spec, home);
    if !verdict.feasible {
        return Err(AuthoringError::InfeasibleIntent {
            code: verdict.code,
            reason: verdict.reason,
        });
    }
    let root =
        compile_when(&intent.when_spec).map_err(|e| AuthoringError::CompileError(e.to_string()))?;
    let text = root.to_string();
    let program = dsl::typecheck(&dsl::TriggerProgram::from_root(root, text), home).map_err(
        |errs| {
            AuthoringError::CompileError(
                errs.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "),
            )
        },
    )?;
    let kind = dsl::classify(&program);
    Ok(CompiledReminder {
        intent: intent.clone(),
        program,
        kind,
    })
}

/// Slot map from one utterance using only the built-in rules.
pub fn extract_slots_fallback(text: &str, home: &HomeConfig, ctx: &AuthoringContext) -> RawSlots {
    extract_slots(text, home, ctx).slots
}

#[derive(Debug, Clone, Serialize)]
pub struct Session {
    pub id: String,
    pub stage: Stage,
    pub slots: RawSlots,
    pub pending_spec: Option<WhenSpec>,
    pub pending_intent: Option<ReminderIntent>,
    pub transcript: Vec<Turn>,
    /// Infeasible WHEN values seen so far.
    pub attempt_count: u32,
    pub max_attempts: u32,
    /// The slot the last reply asked for.
    pub awaiting: Option<Slot>,
    /// Alternatives offered after an infeasible request.
    pub offered: Vec<Suggestion>,
    /// Other time expressions in the message that set WHEN.
    pub alternates: Vec<String>,
    #[serde(skip)]
    pub emitted: Option<CompiledReminder>,
}

impl Session {
    pub fn new(id: impl Into<String>) -> Self {
        Session {
            id: id.into(),
            stage: Stage::Ask,
            slots: RawSlots::new(),
            pending_spec: None,
            pending_intent: None,
            transcript: Vec::new(),
            attempt_count: 0,
            max_attempts: DEFAULT_MAX_ATTEMPTS,
            awaiting: None,
            offered: Vec::new(),
            alternates: Vec::new(),
            emitted: None,
        }
    }

    pub fn with_max_attempts(mut self, n: u32) -> Self {
        self.max_attempts = n;
        self
    }

    /// Number of (user, assistant) exchanges so far.
    pub fn turn_count(&self) -> usize {
        self.transcript
            .iter()
            .filter(|t| t.role == Role::Assistant)
            .count()
    }

    pub fn emitted_dsl(&self) -> Option<String> {
        self.emitted.as_ref().map(CompiledReminder::dsl)
    }
}

const YES: [&str; 16] = [
    "yes", "yeah", "yep", "yup", "y", "sure", "ok", "okay", "correct", "right", "confirm",
    "confirmed", "absolutely", "perfect", "great", "fine",
];
const NO: [&str; 8] = ["no", "nope", "nah", "n", "wrong", "incorrect", "not", "change"];
const CANCEL: [&str; 3] = ["cancel", "stop", "quit"];

fn first_word(text: &str) -> String {
    intent::normalize_phrase(text)
        .split(' ')
        .next()
        .unwrap_or("")
        .to_string()
}

fn is_yes(text: &str) -> bool {
    let n = intent::normalize_phrase(text);
    YES.contains(&first_word(text).as_str())
        || ["sounds good", "do it", "please do", "go ahead", "that is right"].contains(&n.as_str())
}

fn is_no(text: &str) -> bool {
    NO.contains(&first_word(text).as_str()) || intent::normalize_phrase(text).starts_with("actually")
}

fn is_cancel(text: &str) -> bool {
    let n = intent::normalize_phrase(text);
    CANCEL.contains(&n.as_str()) || n == "never mind" || n == "forget it"
}

/// Which offered alternative a short answer picks, if any.
fn pick_offer(text: &str, offered: &[Suggestion]) -> Option<usize> {
    if offered.is_empty() {
        return None;
    }
    let n = intent::normalize_phrase(text);
    let has = |w: &str| n.split(' ').any(|x| x == w);
    if has("second") || has("2") || has("latter") {
        return (offered.len() > 1).then_some(1);
    }
    if is_yes(text) || has("first") || has("1") || has("former") {
        return Some(0);
    }
    None
}

fn summary_sentence(intent: &ReminderIntent) -> String {
    let s = render_intent_sentence(intent);
    match s.strip_prefix("Remind me to ") {
        Some(rest) => format!("Done. I will remind you to {rest}"),
        None => format!("Done. {s}"),
    }
}

/// Processes one user message. The reply is also appended to the transcript.
pub fn handle_user_message(
    session: &mut Session,
    text: &str,
    home: &HomeConfig,
    ctx: &AuthoringContext,
    backend: &mut dyn AssistantBackend,
) -> Result<String, AuthoringError> {
    if session.stage.is_closed() {
        return Err(AuthoringError::SessionClosed);
    }
    session.transcript.push(Turn {
        role: Role::User,
        text: text.to_string(),
        timestamp: ctx.now,
        stage: session.stage,
    });
    let (updates, ext) = read_slots(session, text, home, ctx, backend);
    let guide = if is_cancel(text) {
        session.stage = Stage::Abandoned;
        Guide::Cancelled
    } else {
        match session.stage {
            Stage::Confirm => on_confirm(session, text, updates, ext, home, ctx, backend),
            _ => on_ask(session, text, updates, ext, home, ctx),
        }
    };
    let reply = phrase(session, &guide, backend);
    session.transcript.push(Turn {
        role: Role::Assistant,
        text: reply.clone(),
        timestamp: ctx.now,
        stage: if matches!(guide, Guide::Finalized { .. }) {
            Stage::Finalize
        } else {
            session.stage
        },
    });
    Ok(reply)
}

/// Asks the backend to phrase the move; replies breaking the one-question
/// policy are retried once and then replaced by the built-in wording.
fn phrase(session: &Session, guide: &Guide, backend: &mut dyn AssistantBackend) -> String {
    let want = guide.questions();
    for _ in 0..2 {
        match backend.reply(session, guide) {
            Ok(text) if question_count(&text) == want && !text.trim().is_empty() => return text,
            _ => {}
        }
    }
    fallback_reply(guide)
}

/// Slot updates from the backend, with the built-in extraction as a floor.
fn read_slots(
    session: &Session,
    text: &str,
    home: &HomeConfig,
    ctx: &AuthoringContext,
    backend: &mut dyn AssistantBackend,
) -> (RawSlots, intent::Extraction) {
    let ext = extract_slots(text, home, ctx);
    let mut slots = match backend.read(session, text, home, ctx) {
        Ok(s) => s,
        Err(_) => ext.slots.clone(),
    };
    slots.retain(|_, v| !v.trim().is_empty());
    if session.awaiting == Some(Slot::What) && !slots.contains_key(&Slot::What) {
        if let Some(rest) = &ext.remainder {
            slots.insert(Slot::What, rest.trim_end_matches(['.', '!', '?']).to_string());
        }
    }
    (slots, ext)
}

fn on_ask(
    session: &mut Session,
    text: &str,
    mut updates: RawSlots,
    ext: intent::Extraction,
    home: &HomeConfig,
    ctx: &AuthoringContext,
) -> Guide {
    if let std::collections::btree_map::Entry::Vacant(slot) = updates.entry(Slot::When) {
        if let Some(i) = pick_offer(text, &session.offered) {
            slot.insert(when_slot_value(&session.offered[i].spec));
        }
    }
    if updates.get(&Slot::When) == ext.slots.get(&Slot::When) {
        session.alternates = ext.alternates.clone();
    } else if updates.contains_key(&Slot::When) {
        session.alternates.clear();
    }
    session.slots.extend(updates);
    advance(session, home, ctx)
}

/// Decides the next move from the accumulated slots.
fn advance(session: &mut Session, home: &HomeConfig, ctx: &AuthoringContext) -> Guide {
    session.stage = Stage::Ask;
    session.pending_spec = None;
    session.pending_intent = None;
    let what = session.slots.get(&Slot::What).cloned();

    let Some(when_text) = session.slots.get(&Slot::When).cloned() else {
        session.awaiting = Some(Slot::When);
        return Guide::AskWhen { what };
    };
    let spec = match parse_time_expression(&when_text, home, ctx) {
        Ok(s) => s,
        Err(_) => {
            session.slots.remove(&Slot::When);
            session.awaiting = Some(Slot::When);
            return Guide::NotUnderstood { text: when_text };
        }
    };
    let verdict = check_feasibility(&spec, home);
    if !verdict.feasible {
        session.slots.remove(&Slot::When);
        session.attempt_count += 1;
        if session.attempt_count > session.max_attempts {
            session.stage = Stage::Abandoned;
            session.awaiting = None;
            return Guide::Abandoned {
                reason: verdict.reason,
            };
        }
        session.awaiting = Some(Slot::When);
        session.offered = verdict.suggestions.iter().take(2).cloned().collect();
        return Guide::Infeasible {
            reason: verdict.reason,
            suggestions: session.offered.clone(),
        };
    }
    session.offered.clear();
    if what.is_none() {
        session.awaiting = Some(Slot::What);
        return Guide::AskWhat;
    }

    let intent = match normalize_lenient(&mut session.slots, home, ctx) {
        Ok(i) => i,
        Err(_) => {
            session.slots.remove(&Slot::When);
            session.awaiting = Some(Slot::When);
            return Guide::NotUnderstood { text: when_text };
        }
    };
    session.awaiting = None;
    session.stage = Stage::Confirm;
    session.pending_spec = Some(spec);
    let sentence = render_intent_sentence(&intent);
    session.pending_intent = Some(intent);
    Guide::Confirm {
        sentence,
        alternates: session.alternates.clone(),
    }
}

/// `normalize_intent`, dropping optional slots whose values are unusable.
fn normalize_lenient(
    slots: &mut RawSlots,
    home: &HomeConfig,
    ctx: &AuthoringContext,
) -> Result<ReminderIntent, IntentError> {
    loop {
        match normalize_intent(slots, home, ctx) {
            Err(IntentError::InvalidValue { slot, .. })
                if !matches!(slot, Slot::What | Slot::When) =>
            {
                slots.remove(&slot);
            }
            other => return other,
        }
    }
}

fn on_confirm(
    session: &mut Session,
    text: &str,
    updates: RawSlots,
    ext: intent::Extraction,
    home: &HomeConfig,
    ctx: &AuthoringContext,
    backend: &mut dyn AssistantBackend,
) -> Guide {
    let pending = session.pending_intent.clone().expect("confirm stage has an intent");
    if updates.is_empty() && is_yes(text) {
        return finalize(session, pending, home, ctx, backend);
    }
    if updates.is_empty() && !is_no(text) {
        return Guide::ConfirmAgain {
            sentence: render_intent_sentence(&pending),
        };
    }
    // a rejection: clear what the user disputes, by default the time
    if updates.is_empty() {
        session.slots.remove(&Slot::When);
    }
    if updates.contains_key(&Slot::When) && updates.get(&Slot::When) == ext.slots.get(&Slot::When) {
        session.alternates = ext.alternates.clone();
    }
    session.slots.extend(updates);
    advance(session, home, ctx)
}

fn finalize(
    session: &mut Session,
    pending: ReminderIntent,
    home: &HomeConfig,
    ctx: &AuthoringContext,
    backend: &mut dyn AssistantBackend,
) -> Guide {
    session.stage = Stage::Finalize;
    // the session's own slots win over anything the backend recalls
    let mut merged = backend.summarize(&session.transcript, ctx).unwrap_or_default();
    merged.extend(session.slots.clone());
    let intent = match normalize_lenient(&mut merged, home, ctx) {
        Ok(i) if i.when_spec == pending.when_spec && i.what == pending.what => ReminderIntent {
            created_at: pending.created_at,
            ..i
        },
        _ => pending,
    };
    match compile_intent(&intent, home) {
        Ok(compiled) => {
            let summary = summary_sentence(&compiled.intent);
            session.emitted = Some(compiled);
            session.stage = Stage::Done;
            session.awaiting = None;
            Guide::Finalized { summary }
        }
        Err(e) => {
            session.slots.remove(&Slot::When);
            session.stage = Stage::Ask;
            session.awaiting = Some(Slot::When);
            Guide::Infeasible {
                reason: e.to_string(),
                suggestions: Vec::new(),
            }
        }
    }
}


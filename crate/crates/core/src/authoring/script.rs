//! Replaying scripted conversations with per-turn expectations.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::backend::{ScriptedBackend, ScriptedStep};
use super::{handle_user_message, AuthoringError, CompiledReminder, Role, Session, Stage};
use crate::dsl::{self, TriggerKind};
use crate::home::HomeConfig;
use crate::intent::{AuthoringContext, RawSlots, Slot};

/// One line of a script fixture.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ScriptEntry {
    pub role: Option<Role>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub text: Option<String>,
    /// Scripted slot readings for the preceding user message.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slots: Option<BTreeMap<String, String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expect_stage: Option<Stage>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expect_slots: Option<BTreeMap<String, String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expect_dsl: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expect_kind: Option<TriggerKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expect_reply: Option<String>,
}

pub fn load_script(source: &str) -> Result<Vec<ScriptEntry>, AuthoringError> {
    source
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str::<ScriptEntry>(l)
                .map_err(|e| AuthoringError::MalformedScript(format!("line {}: {e}", i + 1)))
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct ScriptOutcome {
    pub reminder: Option<CompiledReminder>,
    pub turn_count: usize,
    pub session: Session,
}

fn slot_map(raw: &BTreeMap<String, String>) -> Result<RawSlots, AuthoringError> {
    raw.iter()
        .map(|(k, v)| {
            Slot::parse(k)
                .map(|s| (s, v.clone()))
                .ok_or_else(|| AuthoringError::MalformedScript(format!("unknown slot {k}")))
        })
        .collect()
}

fn canonical(src: &str) -> String {
    dsl::parse(src).map(|p| dsl::format(&p)).unwrap_or_else(|_| src.to_string())
}

/// Pairs each user line with the assistant line after it, if any.
fn exchanges(script: &[ScriptEntry]) -> Result<Vec<(String, ScriptEntry)>, AuthoringError> {
    let mut out: Vec<(String, ScriptEntry)> = Vec::new();
    let mut open = false;
    for (i, e) in script.iter().enumerate() {
        match e.role {
            Some(Role::User) => {
                let text = e.text.clone().ok_or_else(|| {
                    AuthoringError::MalformedScript(format!("entry {}: user line without text", i + 1))
                })?;
                out.push((text, ScriptEntry::default()));
                open = true;
            }
            Some(Role::Assistant) if open => {
                out.last_mut().expect("open exchange").1 = e.clone();
                open = false;
            }
            _ => {
                return Err(AuthoringError::MalformedScript(format!(
                    "entry {}: expected a user line",
                    i + 1
                )))
            }
        }
    }
    Ok(out)
}

/// Drives a session through the script with the scripted backend and
/// checks each pinned expectation.
pub fn run_scripted_session(
    script: &[ScriptEntry],
    home: &HomeConfig,
    ctx: &AuthoringContext,
) -> Result<ScriptOutcome, AuthoringError> {
    let turns = exchanges(script)?;
    let steps = turns
        .iter()
        .map(|(_, e)| {
            Ok(ScriptedStep {
                slots: e.slots.as_ref().map(slot_map).transpose()?,
                text: e.text.clone(),
            })
        })
        .collect::<Result<Vec<_>, AuthoringError>>()?;
    let mut backend = ScriptedBackend::new(home.clone(), steps);
    let mut session = Session::new("scripted");

    for (k, (text, expect)) in turns.iter().enumerate() {
        let turn = k + 1;
        let diverge = |detail: String| AuthoringError::ScriptDivergence { turn, detail };
        let reply = handle_user_message(&mut session, text, home, ctx, &mut backend)
            .map_err(|e| diverge(e.to_string()))?;

        if let Some(want) = &expect.expect_reply {
            if &reply != want {
                return Err(diverge(format!("reply {reply:?}, expected {want:?}")));
            }
        }
        if let Some(want) = expect.expect_stage {
            let said_in = session.transcript.last().map(|t| t.stage);
            if said_in != Some(want) && session.stage != want {
                return Err(diverge(format!(
                    "stage {}, expected {}",
                    session.stage.as_str(),
                    want.as_str()
                )));
            }
        }
        if let Some(want) = &expect.expect_slots {
            for (slot, value) in slot_map(want)? {
                let got = session.slots.get(&slot);
                if got != Some(&value) {
                    return Err(diverge(format!("{slot} is {got:?}, expected {value:?}")));
                }
            }
        }
        let program = session.emitted.as_ref().map(|c| (c.dsl(), c.kind)).or_else(|| {
            session
                .pending_intent
                .as_ref()
                .and_then(|i| super::compile_intent(i, home).ok())
                .map(|c| (c.dsl(), c.kind))
        });
        if let Some(want) = &expect.expect_dsl {
            let got = program.as_ref().map(|p| p.0.as_str());
            if got != Some(canonical(want).as_str()) {
                return Err(diverge(format!("program {got:?}, expected {want:?}")));
            }
        }
        if let Some(want) = expect.expect_kind {
            let got = program.as_ref().map(|p| p.1);
            if got != Some(want) {
                return Err(diverge(format!("kind {got:?}, expected {want}")));
            }
        }
    }
    Ok(ScriptOutcome {
        reminder: session.emitted.clone(),
        turn_count: session.turn_count(),
        session,
    })
}

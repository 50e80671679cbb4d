//! Assistant backends: who reads slot values and who words the replies.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{Role, Session, Turn};
use crate::feasibility::Suggestion;
use crate::home::HomeConfig;
use crate::intent::{extract_slots, AuthoringContext, RawSlots};

/// The move the session machine has chosen; a backend only words it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "move", rename_all = "snake_case")]
pub enum Guide {
    AskWhen { what: Option<String> },
    AskWhat,
    NotUnderstood { text: String },
    Infeasible { reason: String, suggestions: Vec<Suggestion> },
    Confirm { sentence: String, alternates: Vec<String> },
    ConfirmAgain { sentence: String },
    Finalized { summary: String },
    Abandoned { reason: String },
    Cancelled,
}

impl Guide {
    /// How many questions a reply for this move must contain.
    pub fn questions(&self) -> usize {
        match self {
            Guide::Finalized { .. } | Guide::Abandoned { .. } | Guide::Cancelled => 0,
            _ => 1,
        }
    }
}

pub fn question_count(text: &str) -> usize {
    text.matches('?').count()
}

/// Built-in wording for every move.
pub fn fallback_reply(guide: &Guide) -> String {
    match guide {
        Guide::AskWhen { what: Some(w) } => format!(
            "When should I remind you to {}?",
            w.trim_end_matches(['.', '!', '?'])
        ),
        Guide::AskWhen { what: None } => "When would you like to be reminded?".into(),
        Guide::AskWhat => "What should I remind you about?".into(),
        Guide::NotUnderstood { text } => format!(
            "I couldn't work out a time from \"{text}\". When should I remind you?"
        ),
        Guide::Infeasible {
            reason,
            suggestions,
        } => match suggestions.as_slice() {
            [] => format!("{reason} When else could I remind you?"),
            [a] => format!("{reason} Would you like a reminder {} instead?", a.phrase),
            [a, b, ..] => format!(
                "{reason} Would you like a reminder {}, or {} instead?",
                a.phrase, b.phrase
            ),
        },
        Guide::Confirm {
            sentence,
            alternates,
        } => {
            let mut s = sentence.clone();
            if !alternates.is_empty() {
                let quoted: Vec<String> = alternates.iter().map(|a| format!("\"{a}\"")).collect();
                s.push_str(&format!(
                    " I also noticed {} in your message; say no if that was the time you meant.",
                    quoted.join(" and ")
                ));
            }
            s.push_str(" Should I set this reminder?");
            s
        }
        Guide::ConfirmAgain { sentence } => {
            format!("Please answer yes or no. {sentence} Should I set this reminder?")
        }
        Guide::Finalized { summary } => summary.clone(),
        Guide::Abandoned { reason } => {
            format!("{reason} I have stopped this request. You can start a new one at any time.")
        }
        Guide::Cancelled => "Okay, I won't set that reminder.".into(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BackendError {
    #[error("backend unreachable: {0}")]
    Transport(String),
    #[error("backend answered in an unexpected form: {0}")]
    Protocol(String),
}

pub trait AssistantBackend {
    /// Slot values stated in one user message.
    fn read(
        &mut self,
        session: &Session,
        text: &str,
        home: &HomeConfig,
        ctx: &AuthoringContext,
    ) -> Result<RawSlots, BackendError>;

    /// Words the chosen move.
    fn reply(&mut self, session: &Session, guide: &Guide) -> Result<String, BackendError>;

    /// Slot values of a whole conversation.
    fn summarize(
        &mut self,
        transcript: &[Turn],
        ctx: &AuthoringContext,
    ) -> Result<RawSlots, BackendError>;
}

/// Rule-based reading and templated replies; needs no network.
#[derive(Debug, Clone)]
pub struct FallbackBackend {
    home: HomeConfig,
}

impl FallbackBackend {
    pub fn new(home: HomeConfig) -> Self {
        FallbackBackend { home }
    }
}

impl AssistantBackend for FallbackBackend {
    fn read(
        &mut self,
        _session: &Session,
        text: &str,
        home: &HomeConfig,
        ctx: &AuthoringContext,
    ) -> Result<RawSlots, BackendError> {
        Ok(extract_slots(text, home, ctx).slots)
    }

    fn reply(&mut self, _session: &Session, guide: &Guide) -> Result<String, BackendError> {
        Ok(fallback_reply(guide))
    }

    fn summarize(
        &mut self,
        transcript: &[Turn],
        ctx: &AuthoringContext,
    ) -> Result<RawSlots, BackendError> {
        let mut slots = RawSlots::new();
        for t in transcript.iter().filter(|t| t.role == Role::User) {
            slots.extend(extract_slots(&t.text, &self.home, ctx).slots);
        }
        Ok(slots)
    }
}

/// One scripted assistant step: optional slot readings for the preceding
/// user message and optional reply text.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ScriptedStep {
    pub slots: Option<RawSlots>,
    pub text: Option<String>,
}

/// Replays fixture readings and replies; anything a fixture leaves out is
/// handled by the fallback rules.
#[derive(Debug, Clone)]
pub struct ScriptedBackend {
    steps: VecDeque<ScriptedStep>,
    current: ScriptedStep,
    fallback: FallbackBackend,
}

impl ScriptedBackend {
    pub fn new(home: HomeConfig, steps: Vec<ScriptedStep>) -> Self {
        ScriptedBackend {
            steps: steps.into(),
            current: ScriptedStep::default(),
            fallback: FallbackBackend::new(home),
        }
    }
}

impl AssistantBackend for ScriptedBackend {
    fn read(
        &mut self,
        session: &Session,
        text: &str,
        home: &HomeConfig,
        ctx: &AuthoringContext,
    ) -> Result<RawSlots, BackendError> {
        self.current = self.steps.pop_front().unwrap_or_default();
        match &self.current.slots {
            Some(s) => Ok(s.clone()),
            None => self.fallback.read(session, text, home, ctx),
        }
    }

    fn reply(&mut self, session: &Session, guide: &Guide) -> Result<String, BackendError> {
        match self.current.text.take() {
            Some(t) => Ok(t),
            None => self.fallback.reply(session, guide),
        }
    }

    fn summarize(
        &mut self,
        transcript: &[Turn],
        ctx: &AuthoringContext,
    ) -> Result<RawSlots, BackendError> {
        self.fallback.summarize(transcript, ctx)
    }
}

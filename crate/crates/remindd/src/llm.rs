//! Assistant backend for any OpenAI-compatible chat completions endpoint.
//!
//! Configured with `REMIND_LLM_BASE_URL` (e.g. `http://localhost:11434/v1`),
//! `REMIND_LLM_MODEL` and optionally `REMIND_LLM_API_KEY`. Failures surface
//! as [`BackendError`]s; the session machine then falls back to its own rules.

use std::time::Duration;

use serde_json::{json, Value};

use remind_core::authoring::{
    fallback_reply, AssistantBackend, BackendError, Guide, Role, Session, Turn,
};
use remind_core::home::HomeConfig;
use remind_core::intent::{AuthoringContext, RawSlots, Slot};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LlmConfig {
    pub base_url: String,
    pub model: String,
    pub api_key: Option<String>,
}

impl LlmConfig {
    /// `None` unless both the base URL and the model are set.
    pub fn from_env() -> Option<LlmConfig> {
        let get = |k: &str| std::env::var(k).ok().filter(|v| !v.trim().is_empty());
        Some(LlmConfig {
            base_url: get("REMIND_LLM_BASE_URL")?,
            model: get("REMIND_LLM_MODEL")?,
            api_key: get("REMIND_LLM_API_KEY"),
        })
    }
}

pub struct RemoteBackend {
    cfg: LlmConfig,
    home: HomeConfig,
    http: reqwest::blocking::Client,
}

const READ_PROMPT: &str = "You extract reminder details from one user message. \
Answer with a single JSON object and nothing else. Allowed keys: WHAT (the task, \
as a short verb phrase), WHEN (the time or situation, in the user's words), DATE, \
RECURRENCE (once, daily, or every <weekday>), PRIORITY (high, medium, low). \
Leave out any key the message does not state. Never guess.";

const SUMMARY_PROMPT: &str = "You read a conversation about setting one reminder. \
Answer with a single JSON object and nothing else, using the keys WHAT, WHEN, DATE, \
RECURRENCE and PRIORITY for the values the user finally agreed to. Leave out unknown keys.";

fn reply_prompt(questions: usize) -> String {
    let rule = match questions {
        0 => "Do not ask any question.".to_string(),
        1 => "Ask exactly one question and use exactly one question mark.".to_string(),
        n => format!("Use exactly {n} question marks."),
    };
    format!(
        "You are a friendly reminder assistant in a smart home. Rephrase the draft reply \
for the user in at most three short sentences. Keep every time, activity and suggestion \
from the draft and add nothing new. {rule} Answer with the reply text only."
    )
}

/// Pulls the first JSON object out of a model answer, tolerating code fences
/// and surrounding prose.
pub fn parse_slot_object(content: &str) -> Result<RawSlots, BackendError> {
    let start = content.find('{');
    let end = content.rfind('}');
    let (Some(s), Some(e)) = (start, end) else {
        return Err(BackendError::Protocol(format!("no JSON object in {content:?}")));
    };
    if e < s {
        return Err(BackendError::Protocol(format!("no JSON object in {content:?}")));
    }
    let v: Value = serde_json::from_str(&content[s..=e])
        .map_err(|err| BackendError::Protocol(err.to_string()))?;
    let obj = v
        .as_object()
        .ok_or_else(|| BackendError::Protocol("slots are not an object".into()))?;
    let mut out = RawSlots::new();
    for (k, v) in obj {
        let Some(slot) = Slot::parse(k) else { continue };
        let text = match v {
            Value::String(s) => s.trim().to_string(),
            Value::Null => continue,
            other => other.to_string(),
        };
        if !text.is_empty() {
            out.insert(slot, text);
        }
    }
    Ok(out)
}

fn home_summary(home: &HomeConfig) -> String {
    let activities: Vec<&str> = home.activities.iter().map(|a| a.label.as_str()).collect();
    let events: Vec<&str> = home.event_phrases.keys().map(String::as_str).collect();
    format!(
        "Known activities: {}. Known situations: {}.",
        activities.join(", "),
        events.join("; ")
    )
}

impl RemoteBackend {
    pub fn new(cfg: LlmConfig, home: HomeConfig) -> Result<RemoteBackend, BackendError> {
        let http = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs(30))
            .build()
            .map_err(|e| BackendError::Transport(e.to_string()))?;
        Ok(RemoteBackend { cfg, home, http })
    }

    fn complete(&self, system: &str, user: &str) -> Result<String, BackendError> {
        let url = format!("{}/chat/completions", self.cfg.base_url.trim_end_matches('/'));
        let body = json!({
            "model": self.cfg.model,
            "temperature": 0,
            "messages": [
                {"role": "system", "content": system},
                {"role": "user", "content": user},
            ],
        });
        let mut req = self
            .http
            .post(url)
            .header("content-type", "application/json")
            .body(body.to_string());
        if let Some(key) = &self.cfg.api_key {
            req = req.header("authorization", format!("Bearer {key}"));
        }
        let resp = req.send().map_err(|e| BackendError::Transport(e.to_string()))?;
        let status = resp.status();
        let text = resp.text().map_err(|e| BackendError::Transport(e.to_string()))?;
        if !status.is_success() {
            return Err(BackendError::Transport(format!("HTTP {status}: {text}")));
        }
        let v: Value =
            serde_json::from_str(&text).map_err(|e| BackendError::Protocol(e.to_string()))?;
        v.pointer("/choices/0/message/content")
            .and_then(Value::as_str)
            .map(str::to_string)
            .ok_or_else(|| BackendError::Protocol("response has no message content".into()))
    }
}

impl AssistantBackend for RemoteBackend {
    fn read(
        &mut self,
        _session: &Session,
        text: &str,
        _home: &HomeConfig,
        ctx: &AuthoringContext,
    ) -> Result<RawSlots, BackendError> {
        let system = format!(
            "{READ_PROMPT} {} It is now {}.",
            home_summary(&self.home),
            ctx.now.format("%A %Y-%m-%d %H:%M")
        );
        parse_slot_object(&self.complete(&system, text)?)
    }

    fn reply(&mut self, _session: &Session, guide: &Guide) -> Result<String, BackendError> {
        let draft = fallback_reply(guide);
        let out = self.complete(&reply_prompt(guide.questions()), &draft)?;
        let out = out.trim();
        if out.is_empty() {
            return Err(BackendError::Protocol("empty reply".into()));
        }
        Ok(out.to_string())
    }

    fn summarize(
        &mut self,
        transcript: &[Turn],
        ctx: &AuthoringContext,
    ) -> Result<RawSlots, BackendError> {
        let convo: Vec<String> = transcript
            .iter()
            .map(|t| {
                let who = match t.role {
                    Role::User => "user",
                    Role::Assistant => "assistant",
                };
                format!("{who}: {}", t.text)
            })
            .collect();
        let system = format!("{SUMMARY_PROMPT} It is now {}.", ctx.now.format("%A %Y-%m-%d %H:%M"));
        parse_slot_object(&self.complete(&system, &convo.join("\n"))?)
    }
}

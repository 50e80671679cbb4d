//! Structured reminder intents and their natural-language surface.

pub(crate) mod describe;
mod extract;
pub(crate) mod phrases;

use std::collections::BTreeMap;
use std::fmt;

use chrono::{Duration, NaiveDate, NaiveDateTime, NaiveTime, Timelike, Weekday};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::clock::{format_hhmm, hhmm, Seconds};
use crate::dsl::{self, Event, Step};
use crate::home::{HomeConfig, TimeWindow};

pub use describe::{describe_event, describe_level};
pub use extract::{extract_slots, Extraction};
pub use phrases::normalize_phrase;

/// Reference time for interpreting relative phrases.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AuthoringContext {
    pub now: NaiveDateTime,
}

impl AuthoringContext {
    pub fn new(now: NaiveDateTime) -> Self {
        AuthoringContext { now }
    }

    pub fn current_date(&self) -> NaiveDate {
        self.now.date()
    }
}

pub(crate) fn truncate_to_minute(t: NaiveTime) -> NaiveTime {
    NaiveTime::from_hms_opt(t.hour(), t.minute(), 0).expect("valid time")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ActivityPhase {
    Start,
    End,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum SeqStepSpec {
    Event { dsl: String },
    Hold { level: String, seconds: Seconds },
}

/// When a reminder should fire, before compilation to a trigger program.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum WhenSpec {
    ClockTime {
        #[serde(with = "hhmm")]
        time: NaiveTime,
    },
    InferredTime {
        phrase: String,
        window: TimeWindow,
    },
    ActivityEvent {
        label: String,
        phase: ActivityPhase,
    },
    SensorEvent {
        dsl: String,
    },
    SequenceSpec {
        steps: Vec<SeqStepSpec>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        within: Option<Seconds>,
    },
    Delay {
        base: Box<WhenSpec>,
        #[serde(rename = "seconds")]
        delay: Seconds,
    },
    BeforeActivity {
        label: String,
    },
}

impl WhenSpec {
    pub fn is_time_based(&self) -> bool {
        matches!(
            self,
            WhenSpec::ClockTime { .. } | WhenSpec::InferredTime { .. }
        )
    }
}

/// Maps a parsed trigger back to the most specific intent form.
pub fn spec_from_event(event: &Event) -> WhenSpec {
    match event {
        Event::At(t) => WhenSpec::ClockTime { time: *t },
        Event::Started(a) => WhenSpec::ActivityEvent {
            label: a.clone(),
            phase: ActivityPhase::Start,
        },
        Event::Ended(a) => WhenSpec::ActivityEvent {
            label: a.clone(),
            phase: ActivityPhase::End,
        },
        Event::Seq { steps, within } => WhenSpec::SequenceSpec {
            steps: steps
                .iter()
                .map(|s| match s {
                    Step::Event(e) => SeqStepSpec::Event { dsl: e.to_string() },
                    Step::Hold(l, d) => SeqStepSpec::Hold {
                        level: l.to_string(),
                        seconds: *d,
                    },
                })
                .collect(),
            within: *within,
        },
        Event::After {
            event,
            delay,
            cancel: None,
        } => WhenSpec::Delay {
            base: Box::new(spec_from_event(event)),
            delay: *delay,
        },
        other => WhenSpec::SensorEvent {
            dsl: other.to_string(),
        },
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CompileError {
    #[error("\"before {0}\" cannot be detected ahead of time")]
    NotExpressible(String),
    #[error("invalid trigger snippet: {0}")]
    Snippet(String),
}

/// Lowers a WHEN spec to a trigger expression (not yet type-checked).
pub fn compile_when(spec: &WhenSpec) -> Result<Event, CompileError> {
    let parse = |text: &str| {
        dsl::parse(text)
            .map(|p| p.root)
            .map_err(|e| CompileError::Snippet(format!("{text}: {e}")))
    };
    Ok(match spec {
        WhenSpec::ClockTime { time } => Event::At(*time),
        WhenSpec::InferredTime { window, .. } => Event::At(window.anchor_time()),
        WhenSpec::ActivityEvent { label, phase } => match phase {
            ActivityPhase::Start => Event::Started(label.clone()),
            ActivityPhase::End => Event::Ended(label.clone()),
        },
        WhenSpec::SensorEvent { dsl } => parse(dsl)?,
        WhenSpec::SequenceSpec { steps, within } => {
            let mut parts: Vec<String> = steps
                .iter()
                .map(|s| match s {
                    SeqStepSpec::Event { dsl } => dsl.clone(),
                    SeqStepSpec::Hold { level, seconds } => format!("hold({level}, {seconds})"),
                })
                .collect();
            if let Some(w) = within {
                parts.push(format!("within: {w}"));
            }
            parse(&format!("seq({})", parts.join(", ")))?
        }
        WhenSpec::Delay { base, delay } => Event::After {
            event: Box::new(compile_when(base)?),
            delay: *delay,
            cancel: None,
        },
        WhenSpec::BeforeActivity { label } => {
            return Err(CompileError::NotExpressible(label.replace('_', " ")))
        }
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DateSpec {
    Unrestricted,
    Today,
    Tomorrow,
    Specific(NaiveDate),
}

impl fmt::Display for DateSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DateSpec::Unrestricted => f.write_str("unrestricted"),
            DateSpec::Today => f.write_str("today"),
            DateSpec::Tomorrow => f.write_str("tomorrow"),
            DateSpec::Specific(d) => write!(f, "{}", d.format("%Y-%m-%d")),
        }
    }
}

impl DateSpec {
    pub fn parse_value(text: &str, today: NaiveDate) -> Option<DateSpec> {
        let norm = normalize_phrase(text);
        match norm.as_str() {
            "unrestricted" | "any" | "any day" => return Some(DateSpec::Unrestricted),
            _ => {}
        }
        let toks: Vec<String> = norm.split(' ').map(str::to_string).collect();
        let span = phrases::find_date(&toks, today)?;
        (span.start == 0 && span.end == toks.len()).then_some(span.value)
    }
}

impl Serialize for DateSpec {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for DateSpec {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        match s.as_str() {
            "unrestricted" => Ok(DateSpec::Unrestricted),
            "today" => Ok(DateSpec::Today),
            "tomorrow" => Ok(DateSpec::Tomorrow),
            other => NaiveDate::parse_from_str(other, "%Y-%m-%d")
                .map(DateSpec::Specific)
                .map_err(serde::de::Error::custom),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Recurrence {
    Once,
    Daily,
    Weekly(Weekday),
}

pub(crate) fn weekday_name(d: Weekday) -> &'static str {
    match d {
        Weekday::Mon => "monday",
        Weekday::Tue => "tuesday",
        Weekday::Wed => "wednesday",
        Weekday::Thu => "thursday",
        Weekday::Fri => "friday",
        Weekday::Sat => "saturday",
        Weekday::Sun => "sunday",
    }
}

impl fmt::Display for Recurrence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Recurrence::Once => f.write_str("once"),
            Recurrence::Daily => f.write_str("daily"),
            Recurrence::Weekly(d) => write!(f, "weekly:{}", weekday_name(*d)),
        }
    }
}

impl Recurrence {
    /// Accepts the slot forms (`once`, `daily`, `weekly:monday`) and the
    /// everyday phrasings ("every night", "each Tuesday").
    pub fn parse_value(text: &str) -> Option<Recurrence> {
        let norm = normalize_phrase(text);
        match norm.as_str() {
            "once" => return Some(Recurrence::Once),
            "daily" => return Some(Recurrence::Daily),
            _ => {}
        }
        if let Some(day) = text.trim().to_lowercase().strip_prefix("weekly:") {
            return phrases::weekday_from_word(day.trim()).map(Recurrence::Weekly);
        }
        let toks: Vec<String> = norm.split(' ').map(str::to_string).collect();
        let span = phrases::find_recurrence(&toks)?;
        (span.start == 0 && span.end == toks.len()).then_some(span.value)
    }
}

impl Serialize for Recurrence {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Recurrence {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Recurrence::parse_value(&s)
            .ok_or_else(|| serde::de::Error::custom(format!("bad recurrence `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Priority {
    High,
    #[default]
    Medium,
    Low,
}

impl Priority {
    pub fn as_str(self) -> &'static str {
        match self {
            Priority::High => "high",
            Priority::Medium => "medium",
            Priority::Low => "low",
        }
    }

    pub fn parse_value(text: &str) -> Option<Priority> {
        match normalize_phrase(text).as_str() {
            "high" | "urgent" | "important" => Some(Priority::High),
            "medium" | "normal" => Some(Priority::Medium),
            "low" => Some(Priority::Low),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReminderIntent {
    pub what: String,
    #[serde(rename = "when")]
    pub when_spec: WhenSpec,
    pub date: DateSpec,
    pub recurrence: Recurrence,
    pub priority: Priority,
    pub created_at: NaiveDateTime,
}

impl ReminderIntent {
    /// The single calendar date this reminder is restricted to, if any.
    pub fn resolved_date(&self) -> Option<NaiveDate> {
        let created = self.created_at.date();
        match self.date {
            DateSpec::Unrestricted => None,
            DateSpec::Today => Some(created),
            DateSpec::Tomorrow => Some(created + Duration::days(1)),
            DateSpec::Specific(d) => Some(d),
        }
    }

    /// Raw slot projection; `normalize_intent` maps it back to `self`.
    pub fn to_raw(&self) -> RawSlots {
        let mut raw = RawSlots::new();
        raw.insert(Slot::What, self.what.clone());
        raw.insert(Slot::When, when_slot_value(&self.when_spec));
        raw.insert(Slot::Date, self.date.to_string());
        raw.insert(Slot::Recurrence, self.recurrence.to_string());
        raw.insert(Slot::Priority, self.priority.as_str().to_string());
        raw
    }
}

/// The WHEN slot text that parses back to `spec`.
pub fn when_slot_value(spec: &WhenSpec) -> String {
    match spec {
        WhenSpec::ClockTime { time } => format_hhmm(*time),
        WhenSpec::InferredTime { phrase, .. } => phrase.clone(),
        WhenSpec::BeforeActivity { label } => format!("before {}", label.replace('_', " ")),
        other => match compile_when(other) {
            Ok(e) => format!("{STRUCTURED_PREFIX}{e}"),
            Err(_) => String::new(),
        },
    }
}

/// Slot names of a reminder.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Slot {
    What,
    When,
    Date,
    Recurrence,
    Priority,
}

impl Slot {
    pub const ALL: [Slot; 5] = [
        Slot::What,
        Slot::When,
        Slot::Date,
        Slot::Recurrence,
        Slot::Priority,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Slot::What => "WHAT",
            Slot::When => "WHEN",
            Slot::Date => "DATE",
            Slot::Recurrence => "RECURRENCE",
            Slot::Priority => "PRIORITY",
        }
    }

    pub fn parse(name: &str) -> Option<Slot> {
        Slot::ALL
            .into_iter()
            .find(|s| s.as_str().eq_ignore_ascii_case(name.trim()))
    }
}

impl fmt::Display for Slot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

pub type RawSlots = BTreeMap<Slot, String>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IntentError {
    #[error("missing slot {0}")]
    MissingSlot(Slot),
    #[error("could not understand the time expression \"{0}\"")]
    UnparseableWhen(String),
    #[error("invalid {slot} value \"{value}\"")]
    InvalidValue { slot: Slot, value: String },
}

/// A WHEN value of this form is a trigger snippet, used by structured
/// backends and by the raw projection.
pub const STRUCTURED_PREFIX: &str = "dsl:";

/// Parses a WHEN phrase into a spec. The whole text must be one expression.
pub fn parse_time_expression(
    text: &str,
    home: &HomeConfig,
    ctx: &AuthoringContext,
) -> Result<WhenSpec, IntentError> {
    let unparseable = || IntentError::UnparseableWhen(text.to_string());
    if let Some(snippet) = text.trim().strip_prefix(STRUCTURED_PREFIX) {
        let program = dsl::parse(snippet).map_err(|_| unparseable())?;
        return Ok(spec_from_event(&program.root));
    }
    let toks: Vec<String> = phrases::tokenize(text).into_iter().map(|t| t.norm).collect();
    if toks.is_empty() {
        return Err(unparseable());
    }
    let lex = phrases::Lexicon::new(home);
    lex.candidates(home, &toks, ctx)
        .into_iter()
        .filter(|c| c.start == 0 && c.end == toks.len())
        .min_by_key(|c| c.rank)
        .map(|c| c.spec)
        .ok_or_else(unparseable)
}

/// Validates raw slots and applies defaults: DATE today for one-off
/// reminders, RECURRENCE once, PRIORITY medium. Recurring reminders are
/// never date-restricted.
pub fn normalize_intent(
    raw: &RawSlots,
    home: &HomeConfig,
    ctx: &AuthoringContext,
) -> Result<ReminderIntent, IntentError> {
    let get = |slot| {
        raw.get(&slot)
            .map(|v| v.trim())
            .filter(|v| !v.is_empty())
    };
    let invalid = |slot, value: &str| IntentError::InvalidValue {
        slot,
        value: value.to_string(),
    };
    let what = get(Slot::What).ok_or(IntentError::MissingSlot(Slot::What))?;
    let when = get(Slot::When).ok_or(IntentError::MissingSlot(Slot::When))?;
    let when_spec = parse_time_expression(when, home, ctx)?;
    let recurrence = match get(Slot::Recurrence) {
        Some(v) => Recurrence::parse_value(v).ok_or_else(|| invalid(Slot::Recurrence, v))?,
        None => Recurrence::Once,
    };
    let date = match (recurrence, get(Slot::Date)) {
        (Recurrence::Once, Some(v)) => {
            DateSpec::parse_value(v, ctx.current_date()).ok_or_else(|| invalid(Slot::Date, v))?
        }
        (Recurrence::Once, None) => DateSpec::Today,
        _ => DateSpec::Unrestricted,
    };
    let priority = match get(Slot::Priority) {
        Some(v) => Priority::parse_value(v).ok_or_else(|| invalid(Slot::Priority, v))?,
        None => Priority::Medium,
    };
    Ok(ReminderIntent {
        what: what.to_string(),
        when_spec,
        date,
        recurrence,
        priority,
        created_at: ctx.now,
    })
}

/// The confirmation sentence read back to the user.
pub fn render_intent_sentence(intent: &ReminderIntent) -> String {
    let mut out = format!(
        "Remind me to {} {}",
        intent.what.trim_end_matches(['.', '!', '?']),
        describe::when_phrase(&intent.when_spec)
    );
    match intent.recurrence {
        Recurrence::Once => {}
        Recurrence::Daily => out.push_str(", every day"),
        Recurrence::Weekly(d) => {
            out.push_str(", every ");
            out.push_str(weekday_name(d));
        }
    }
    match intent.date {
        DateSpec::Unrestricted => {}
        DateSpec::Today => out.push_str(" today"),
        DateSpec::Tomorrow => out.push_str(" tomorrow"),
        DateSpec::Specific(d) => out.push_str(&format!(" on {}", d.format("%Y-%m-%d"))),
    }
    out.push('.');
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::home::{load_home_config, Anchor};

    fn ctx() -> AuthoringContext {
        AuthoringContext::new(
            NaiveDate::from_ymd_opt(2026, 10, 15)
                .unwrap()
                .and_hms_opt(14, 3, 27)
                .unwrap(),
        )
    }

    fn t(h: u32, m: u32) -> NaiveTime {
        NaiveTime::from_hms_opt(h, m, 0).unwrap()
    }

    fn home() -> HomeConfig {
        HomeConfig::sample_home()
    }

    fn when(text: &str) -> WhenSpec {
        parse_time_expression(text, &home(), &ctx()).unwrap()
    }

    #[test]
    fn clock_phrases() {
        assert_eq!(when("7pm"), WhenSpec::ClockTime { time: t(19, 0) });
        assert_eq!(when("at 19:00"), WhenSpec::ClockTime { time: t(19, 0) });
        assert_eq!(when("8:15 am"), WhenSpec::ClockTime { time: t(8, 15) });
        assert_eq!(when("around 6 PM"), WhenSpec::ClockTime { time: t(18, 0) });
    }

    #[test]
    fn vague_phrases_resolve_through_mappings() {
        match when("in the evening") {
            WhenSpec::InferredTime { phrase, window } => {
                assert_eq!(phrase, "in the evening");
                assert_eq!(window.start, t(18, 0));
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(when("around bedtime"), WhenSpec::InferredTime { .. }));
    }

    #[test]
    fn after_dinner_depends_on_configured_activities() {
        assert_eq!(
            when("after dinner"),
            WhenSpec::ActivityEvent {
                label: "eating".into(),
                phase: ActivityPhase::End
            }
        );
        let bare = load_home_config(
            r#"{"sensors": [], "time_mappings": {"dinner": {"start": "18:00", "end": "20:00", "anchor": "end"}}}"#,
        )
        .unwrap();
        let spec = parse_time_expression("after dinner", &bare, &ctx()).unwrap();
        assert_eq!(
            spec,
            WhenSpec::InferredTime {
                phrase: "after dinner".into(),
                window: TimeWindow {
                    start: t(18, 0),
                    end: t(20, 0),
                    anchor: Anchor::End,
                    wraps: false
                }
            }
        );
        assert_eq!(compile_when(&spec).unwrap(), Event::At(t(20, 0)));
    }

    #[test]
    fn event_phrases() {
        assert_eq!(
            when("when I arrive home"),
            WhenSpec::ActivityEvent {
                label: "entering_home".into(),
                phase: ActivityPhase::Start
            }
        );
        assert_eq!(
            when("every time the front door opens"),
            WhenSpec::SensorEvent {
                dsl: "rising(sensor(contact_front_door))".into()
            }
        );
        assert_eq!(
            when("when jogging starts"),
            WhenSpec::ActivityEvent {
                label: "jogging".into(),
                phase: ActivityPhase::Start
            }
        );
        assert!(matches!(
            when("when I forget my food in the microwave"),
            WhenSpec::SequenceSpec { .. }
        ));
        assert_eq!(
            when("before I leave the house"),
            WhenSpec::BeforeActivity {
                label: "leaving_home".into()
            }
        );
    }

    #[test]
    fn relative_offsets() {
        assert_eq!(
            when("5 minutes after the microwave stops"),
            WhenSpec::Delay {
                base: Box::new(WhenSpec::SensorEvent {
                    dsl: "falling(sensor(plug_microwave) > 1.0)".into()
                }),
                delay: Seconds::new(300).unwrap()
            }
        );
        assert_eq!(
            when("in 10 minutes"),
            WhenSpec::Delay {
                base: Box::new(WhenSpec::ClockTime { time: t(14, 3) }),
                delay: Seconds::new(600).unwrap()
            }
        );
        assert_eq!(
            when("an hour after dinner"),
            WhenSpec::Delay {
                base: Box::new(WhenSpec::ActivityEvent {
                    label: "eating".into(),
                    phase: ActivityPhase::End
                }),
                delay: Seconds::new(3600).unwrap()
            }
        );
    }

    #[test]
    fn unparseable_when() {
        let err = parse_time_expression("whenever the moon is full", &home(), &ctx()).unwrap_err();
        assert!(matches!(err, IntentError::UnparseableWhen(_)));
        assert!(parse_time_expression("", &home(), &ctx()).is_err());
    }

    #[test]
    fn structured_form() {
        assert_eq!(
            when("dsl:ended(eating)"),
            WhenSpec::ActivityEvent {
                label: "eating".into(),
                phase: ActivityPhase::End
            }
        );
    }

    #[test]
    fn normalize_defaults() {
        let mut raw = RawSlots::new();
        raw.insert(Slot::What, "call my son".into());
        raw.insert(Slot::When, "7pm".into());
        let i = normalize_intent(&raw, &home(), &ctx()).unwrap();
        assert_eq!(i.date, DateSpec::Today);
        assert_eq!(i.recurrence, Recurrence::Once);
        assert_eq!(i.priority, Priority::Medium);
        assert_eq!(i.resolved_date(), Some(ctx().current_date()));

        raw.insert(Slot::Recurrence, "every day".into());
        raw.insert(Slot::Date, "tomorrow".into());
        let i = normalize_intent(&raw, &home(), &ctx()).unwrap();
        assert_eq!(i.recurrence, Recurrence::Daily);
        assert_eq!(i.date, DateSpec::Unrestricted);

        raw.remove(&Slot::What);
        assert_eq!(
            normalize_intent(&raw, &home(), &ctx()).unwrap_err(),
            IntentError::MissingSlot(Slot::What)
        );
    }

    #[test]
    fn raw_projection_round_trips() {
        let mut raw = RawSlots::new();
        raw.insert(Slot::What, "take my food out".into());
        raw.insert(Slot::When, "5 minutes after the microwave stops".into());
        raw.insert(Slot::Recurrence, "every tuesday".into());
        let i = normalize_intent(&raw, &home(), &ctx()).unwrap();
        let again = normalize_intent(&i.to_raw(), &home(), &ctx()).unwrap();
        assert_eq!(i, again);
    }

    #[test]
    fn rendering() {
        let mut raw = RawSlots::new();
        raw.insert(Slot::What, "take my food out".into());
        raw.insert(Slot::When, "5 minutes after the microwave stops".into());
        let i = normalize_intent(&raw, &home(), &ctx()).unwrap();
        assert_eq!(
            render_intent_sentence(&i),
            "Remind me to take my food out 300s after the microwave stops today."
        );
        raw.insert(Slot::When, "at 7pm".into());
        raw.insert(Slot::Recurrence, "weekly:monday".into());
        let i = normalize_intent(&raw, &home(), &ctx()).unwrap();
        assert_eq!(
            render_intent_sentence(&i),
            "Remind me to take my food out at 19:00, every monday."
        );
    }

    #[test]
    fn intent_json_shape() {
        let mut raw = RawSlots::new();
        raw.insert(Slot::What, "wash my hands".into());
        raw.insert(Slot::When, "when I arrive home".into());
        raw.insert(Slot::Recurrence, "daily".into());
        let i = normalize_intent(&raw, &home(), &ctx()).unwrap();
        let v = serde_json::to_value(&i).unwrap();
        assert_eq!(v["when"]["type"], "activity_event");
        assert_eq!(v["when"]["phase"], "start");
        assert_eq!(v["recurrence"], "daily");
        assert_eq!(v["date"], "unrestricted");
        let back: ReminderIntent = serde_json::from_value(v).unwrap();
        assert_eq!(back, i);
    }
}

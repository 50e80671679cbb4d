//! The home model: what the house can sense.
//!
//! A [`HomeConfig`] lists the sensors (kind and room), the recognised
//! activity labels, named time windows for vague phrases ("evening",
//! "dinner") and a table mapping everyday event phrases to DSL snippets.
//! It is the ground truth for typechecking and feasibility.

use std::collections::{BTreeMap, BTreeSet};

use chrono::NaiveTime;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::clock::hhmm;
use crate::dsl;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SensorKind {
    Contact,
    Motion,
    Power,
}

impl SensorKind {
    pub fn is_boolean(self) -> bool {
        matches!(self, SensorKind::Contact | SensorKind::Motion)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            SensorKind::Contact => "contact",
            SensorKind::Motion => "motion",
            SensorKind::Power => "power",
        }
    }

    fn from_name(name: &str) -> Option<Self> {
        match name {
            "contact" => Some(SensorKind::Contact),
            "motion" => Some(SensorKind::Motion),
            "power" => Some(SensorKind::Power),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensorDescriptor {
    pub id: String,
    pub kind: SensorKind,
    pub location: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActivityDescriptor {
    pub label: String,
    #[serde(default)]
    pub locations: Vec<String>,
    /// Everyday phrases that name this activity ("dinner" for `eating`).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub aliases: Vec<String>,
}

/// Which edge of a window an "after X" phrase resolves to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Anchor {
    Start,
    End,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TimeWindow {
    #[serde(with = "hhmm")]
    pub start: NaiveTime,
    #[serde(with = "hhmm")]
    pub end: NaiveTime,
    pub anchor: Anchor,
    /// Set when the window crosses midnight (`start > end`).
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub wraps: bool,
}

impl TimeWindow {
    pub fn anchor_time(&self) -> NaiveTime {
        match self.anchor {
            Anchor::Start => self.start,
            Anchor::End => self.end,
        }
    }
}

/// A sensor reading: boolean for contact/motion, amperes for power.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SensorValue {
    Bool(bool),
    Amps(f64),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ValueError {
    #[error("sensor `{id}` expects a {expected} value")]
    WrongKind { id: String, expected: &'static str },
    #[error("sensor `{id}` got invalid reading {value}")]
    InvalidValue { id: String, value: f64 },
}

impl SensorValue {
    pub fn default_for(kind: SensorKind) -> Self {
        if kind.is_boolean() {
            SensorValue::Bool(false)
        } else {
            SensorValue::Amps(0.0)
        }
    }

    /// Checks that this reading is admissible for the given sensor.
    pub fn validate(&self, sensor: &SensorDescriptor) -> Result<(), ValueError> {
        match (*self, sensor.kind.is_boolean()) {
            (SensorValue::Bool(_), true) => Ok(()),
            (SensorValue::Amps(a), false) if a.is_finite() && a >= 0.0 => Ok(()),
            (SensorValue::Amps(a), false) => Err(ValueError::InvalidValue {
                id: sensor.id.clone(),
                value: a,
            }),
            (_, true) => Err(ValueError::WrongKind {
                id: sensor.id.clone(),
                expected: "boolean",
            }),
            (_, false) => Err(ValueError::WrongKind {
                id: sensor.id.clone(),
                expected: "numeric",
            }),
        }
    }

    pub fn as_bool(&self) -> bool {
        match *self {
            SensorValue::Bool(b) => b,
            SensorValue::Amps(a) => a > 0.0,
        }
    }

    pub fn as_number(&self) -> f64 {
        match *self {
            SensorValue::Bool(b) => f64::from(u8::from(b)),
            SensorValue::Amps(a) => a,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("malformed config: {0}")]
    MalformedConfig(String),
    #[error("duplicate id `{0}`")]
    DuplicateId(String),
    #[error("invalid identifier `{0}` (expected [a-z0-9_]+)")]
    InvalidId(String),
    #[error("sensor `{0}` has an empty location")]
    EmptyLocation(String),
    #[error("sensor `{id}` has unknown kind `{kind}`")]
    UnknownSensorKind { id: String, kind: String },
    #[error("time mapping `{0}` is not a valid window")]
    InvalidTimeWindow(String),
    #[error("event phrase `{phrase}` maps to an invalid snippet: {reason}")]
    UnparseablePhraseSnippet { phrase: String, reason: String },
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct HomeConfig {
    pub sensors: Vec<SensorDescriptor>,
    pub activities: Vec<ActivityDescriptor>,
    pub time_mappings: BTreeMap<String, TimeWindow>,
    pub event_phrases: BTreeMap<String, String>,
}

#[derive(Deserialize)]
struct RawConfig {
    sensors: Vec<RawSensor>,
    #[serde(default)]
    activities: Vec<ActivityDescriptor>,
    #[serde(default)]
    time_mappings: BTreeMap<String, TimeWindow>,
    #[serde(default)]
    event_phrases: BTreeMap<String, String>,
}

#[derive(Deserialize)]
struct RawSensor {
    id: String,
    kind: String,
    location: String,
}

#[derive(Serialize)]
struct CanonicalConfig<'a> {
    sensors: &'a [SensorDescriptor],
    activities: &'a [ActivityDescriptor],
    time_mappings: &'a BTreeMap<String, TimeWindow>,
    event_phrases: &'a BTreeMap<String, String>,
}

const SAMPLE_HOME: &str = include_str!("../../../homes/sample_home.json");

pub fn is_identifier(s: &str) -> bool {
    !s.is_empty()
        && s
            .bytes()
            .all(|b| b.is_ascii_lowercase() || b.is_ascii_digit() || b == b'_')
}

/// Parses and validates a config document. Invalid input is rejected, never
/// repaired.
pub fn load_home_config(source: &str) -> Result<HomeConfig, ConfigError> {
    let raw: RawConfig =
        serde_json::from_str(source).map_err(|e| ConfigError::MalformedConfig(e.to_string()))?;

    let mut sensors = Vec::with_capacity(raw.sensors.len());
    let mut seen = BTreeSet::new();
    for s in raw.sensors {
        if !is_identifier(&s.id) {
            return Err(ConfigError::InvalidId(s.id));
        }
        if !seen.insert(s.id.clone()) {
            return Err(ConfigError::DuplicateId(s.id));
        }
        let kind = SensorKind::from_name(&s.kind).ok_or_else(|| ConfigError::UnknownSensorKind {
            id: s.id.clone(),
            kind: s.kind.clone(),
        })?;
        if s.location.trim().is_empty() {
            return Err(ConfigError::EmptyLocation(s.id));
        }
        sensors.push(SensorDescriptor {
            id: s.id,
            kind,
            location: s.location,
        });
    }

    let mut labels = BTreeSet::new();
    for a in &raw.activities {
        if !is_identifier(&a.label) {
            return Err(ConfigError::InvalidId(a.label.clone()));
        }
        if !labels.insert(a.label.clone()) {
            return Err(ConfigError::DuplicateId(a.label.clone()));
        }
    }

    for (phrase, w) in &raw.time_mappings {
        let ordered = w.start <= w.end;
        if ordered == w.wraps {
            return Err(ConfigError::InvalidTimeWindow(phrase.clone()));
        }
    }

    let config = HomeConfig {
        sensors,
        activities: raw.activities,
        time_mappings: raw.time_mappings,
        event_phrases: raw.event_phrases,
    };

    for (phrase, snippet) in &config.event_phrases {
        let reason = match dsl::parse(snippet) {
            Err(e) => Some(e.to_string()),
            Ok(program) => dsl::typecheck(&program, &config).err().map(|errs| {
                errs.iter()
                    .map(ToString::to_string)
                    .collect::<Vec<_>>()
                    .join("; ")
            }),
        };
        if let Some(reason) = reason {
            return Err(ConfigError::UnparseablePhraseSnippet {
                phrase: phrase.clone(),
                reason,
            });
        }
    }

    Ok(config)
}

impl HomeConfig {
    /// The bundled sample apartment.
    pub fn sample_home() -> Self {
        load_home_config(SAMPLE_HOME).expect("bundled config is valid")
    }

    /// Canonical JSON document; `load_home_config` of the result yields an
    /// equal config.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&CanonicalConfig {
            sensors: &self.sensors,
            activities: &self.activities,
            time_mappings: &self.time_mappings,
            event_phrases: &self.event_phrases,
        })
        .expect("config serializes")
    }

    /// Exact-match lookup; callers normalize the phrase first.
    pub fn lookup_time_mapping(&self, phrase: &str) -> Option<&TimeWindow> {
        self.time_mappings.get(phrase)
    }

    pub fn resolve_sensor(&self, id: &str) -> Option<&SensorDescriptor> {
        self.sensors.iter().find(|s| s.id == id)
    }

    pub fn resolve_activity(&self, label: &str) -> Option<&ActivityDescriptor> {
        self.activities.iter().find(|a| a.label == label)
    }

    pub fn has_activity(&self, label: &str) -> bool {
        self.resolve_activity(label).is_some()
    }

    pub fn sensors_at_location(&self, location: &str) -> Vec<&SensorDescriptor> {
        self.sensors
            .iter()
            .filter(|s| s.location == location)
            .collect()
    }

    pub fn is_instrumented(&self, location: &str) -> bool {
        self.sensors.iter().any(|s| s.location == location)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn with_sensors(sensors: &str) -> String {
        format!(r#"{{"sensors": {sensors}, "activities": [], "time_mappings": {{}}, "event_phrases": {{}}}}"#)
    }

    #[test]
    fn sample_config_has_six_sensors_and_six_activities() {
        let home = HomeConfig::sample_home();
        assert_eq!(home.sensors.len(), 6);
        assert_eq!(home.activities.len(), 6);
    }

    #[test]
    fn duplicate_sensor_id_is_rejected() {
        let doc = with_sensors(
            r#"[{"id":"contact_front_door","kind":"contact","location":"entrance"},
                {"id":"contact_front_door","kind":"contact","location":"hall"}]"#,
        );
        assert_eq!(
            load_home_config(&doc),
            Err(ConfigError::DuplicateId("contact_front_door".into()))
        );
    }

    #[test]
    fn unknown_kind_and_bad_ids_are_rejected() {
        let doc = with_sensors(r#"[{"id":"t1","kind":"thermo","location":"hall"}]"#);
        assert!(matches!(
            load_home_config(&doc),
            Err(ConfigError::UnknownSensorKind { .. })
        ));
        let doc = with_sensors(r#"[{"id":"Front-Door","kind":"contact","location":"hall"}]"#);
        assert!(matches!(load_home_config(&doc), Err(ConfigError::InvalidId(_))));
        let doc = with_sensors(r#"[{"id":"door","kind":"contact","location":" "}]"#);
        assert!(matches!(load_home_config(&doc), Err(ConfigError::EmptyLocation(_))));
        assert!(matches!(
            load_home_config("{ not json"),
            Err(ConfigError::MalformedConfig(_))
        ));
    }

    #[test]
    fn phrase_snippets_are_checked_at_load() {
        let doc = r#"{"sensors": [], "activities": [{"label":"entering_home","locations":["entrance"]}],
            "event_phrases": {"when you arrive home": "started(entering_home)"}}"#;
        let home = load_home_config(doc).unwrap();
        assert_eq!(home.event_phrases.len(), 1);

        let doc = r#"{"sensors": [], "activities": [],
            "event_phrases": {"when you arrive home": "started(entering_home)"}}"#;
        assert!(matches!(
            load_home_config(doc),
            Err(ConfigError::UnparseablePhraseSnippet { .. })
        ));
        let doc = r#"{"sensors": [], "event_phrases": {"x": "started("}}"#;
        assert!(matches!(
            load_home_config(doc),
            Err(ConfigError::UnparseablePhraseSnippet { .. })
        ));
    }

    #[test]
    fn time_windows_must_be_ordered_or_wrap() {
        let doc = r#"{"sensors": [], "time_mappings": {"night": {"start":"22:00","end":"06:00","anchor":"start"}}}"#;
        assert_eq!(
            load_home_config(doc),
            Err(ConfigError::InvalidTimeWindow("night".into()))
        );
        let doc = r#"{"sensors": [], "time_mappings": {"night": {"start":"22:00","end":"06:00","anchor":"start","wraps":true}}}"#;
        assert!(load_home_config(doc).is_ok());
        let doc = r#"{"sensors": [], "time_mappings": {"x": {"start":"25:00","end":"06:00","anchor":"start"}}}"#;
        assert!(matches!(load_home_config(doc), Err(ConfigError::MalformedConfig(_))));
    }

    #[test]
    fn time_mapping_lookup_is_exact() {
        let home = HomeConfig::sample_home();
        let dinner = home.lookup_time_mapping("dinner").unwrap();
        assert_eq!(dinner.start, NaiveTime::from_hms_opt(18, 0, 0).unwrap());
        assert_eq!(dinner.end, NaiveTime::from_hms_opt(20, 0, 0).unwrap());
        assert_eq!(dinner.anchor, Anchor::End);
        let evening = home.lookup_time_mapping("evening").unwrap();
        assert_eq!(evening.anchor, Anchor::Start);
        assert!(home.lookup_time_mapping("before breakfast").is_none());
        assert!(home.lookup_time_mapping("Dinner").is_none());
    }

    #[test]
    fn sensor_resolution() {
        let home = HomeConfig::sample_home();
        let s = home.resolve_sensor("contact_microwave_door").unwrap();
        assert_eq!(s.kind, SensorKind::Contact);
        assert_eq!(s.location, "kitchen");
        assert!(home.resolve_sensor("plug_bedroom").is_none());
        assert!(home.resolve_sensor("").is_none());
    }

    #[test]
    fn kitchen_sensors() {
        let home = HomeConfig::sample_home();
        let ids: BTreeSet<&str> = home
            .sensors_at_location("kitchen")
            .iter()
            .map(|s| s.id.as_str())
            .collect();
        // enumerated by hand from homes/sample_home.json
        let expected: BTreeSet<&str> = [
            "contact_microwave_door",
            "plug_microwave",
            "stove_activity",
            "contact_refrigerator",
        ]
        .into_iter()
        .collect();
        assert_eq!(ids, expected);
        assert!(home.sensors_at_location("garage").is_empty());
        assert!(home.sensors_at_location("").is_empty());
    }

    #[test]
    fn location_queries_partition_sensors() {
        let home = HomeConfig::sample_home();
        for s in &home.sensors {
            for loc in home.sensors.iter().map(|o| &o.location) {
                let hit = home.sensors_at_location(loc).iter().any(|x| x.id == s.id);
                assert_eq!(hit, *loc == s.location);
            }
        }
    }

    #[test]
    fn canonical_serialization_round_trips() {
        let home = HomeConfig::sample_home();
        assert_eq!(load_home_config(&home.to_json()).unwrap(), home);
    }

    #[test]
    fn sensor_values_validate_against_kind() {
        let home = HomeConfig::sample_home();
        let plug = home.resolve_sensor("plug_microwave").unwrap();
        let door = home.resolve_sensor("contact_front_door").unwrap();
        assert!(SensorValue::Amps(1.5).validate(plug).is_ok());
        assert!(matches!(
            SensorValue::Amps(-1.0).validate(plug),
            Err(ValueError::InvalidValue { .. })
        ));
        assert!(SensorValue::Bool(true).validate(plug).is_err());
        assert!(SensorValue::Bool(true).validate(door).is_ok());
        assert!(SensorValue::Amps(1.0).validate(door).is_err());
    }
}

//! Trace files: a JSON header line `{home_ref, start, duration}` followed by
//! one event per line.

use chrono::{Duration, NaiveDateTime};
use serde::{Deserialize, Serialize};

use super::SimError;
use crate::home::{HomeConfig, SensorValue};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TraceKind {
    Sensor,
    Activity,
}

/// Either seconds from the trace start or an absolute local timestamp.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TraceTime {
    Offset(u64),
    Absolute(NaiveDateTime),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceEvent {
    pub t: TraceTime,
    pub kind: TraceKind,
    /// Sensor id, or activity label (`none` for idle).
    pub target: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<SensorValue>,
}

impl TraceEvent {
    pub fn sensor(t: u64, id: &str, value: SensorValue) -> Self {
        TraceEvent {
            t: TraceTime::Offset(t),
            kind: TraceKind::Sensor,
            target: id.to_string(),
            value: Some(value),
        }
    }

    pub fn activity(t: u64, label: Option<&str>) -> Self {
        TraceEvent {
            t: TraceTime::Offset(t),
            kind: TraceKind::Activity,
            target: label.unwrap_or("none").to_string(),
            value: None,
        }
    }

    /// The activity this event switches to; `None` means idle.
    pub fn activity_label(&self) -> Option<&str> {
        (self.target != "none").then_some(self.target.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Header {
    home_ref: String,
    start: NaiveDateTime,
    duration: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub home_ref: String,
    pub start: NaiveDateTime,
    /// Seconds; ticks run from `start` through `start + duration`.
    pub duration: u64,
    pub events: Vec<TraceEvent>,
}

impl Trace {
    pub fn new(start: NaiveDateTime, duration: u64, events: Vec<TraceEvent>) -> Self {
        Trace {
            home_ref: "sample_home".into(),
            start,
            duration,
            events,
        }
    }

    pub fn offset_of(&self, t: TraceTime) -> i64 {
        match t {
            TraceTime::Offset(s) => s as i64,
            TraceTime::Absolute(at) => (at - self.start).num_seconds(),
        }
    }

    /// The same trace starting on `date` at the same time of day.
    pub fn rebased(&self, date: chrono::NaiveDate) -> Trace {
        let shift = date.and_time(self.start.time()) - self.start;
        let mut out = self.clone();
        out.start += shift;
        for e in &mut out.events {
            if let TraceTime::Absolute(at) = &mut e.t {
                *at += shift;
            }
        }
        out
    }

    pub fn time_of(&self, offset: i64) -> NaiveDateTime {
        self.start + Duration::seconds(offset)
    }

    pub fn from_jsonl(text: &str) -> Result<Trace, SimError> {
        let mut lines = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty());
        let (_, first) = lines
            .next()
            .ok_or_else(|| SimError::MalformedTrace { line: 1, reason: "empty trace".into() })?;
        let header: Header = serde_json::from_str(first)
            .map_err(|e| SimError::MalformedTrace { line: 1, reason: e.to_string() })?;
        let mut events = Vec::new();
        for (i, line) in lines {
            let ev: TraceEvent = serde_json::from_str(line).map_err(|e| SimError::MalformedTrace {
                line: i + 1,
                reason: e.to_string(),
            })?;
            events.push(ev);
        }
        let trace = Trace {
            home_ref: header.home_ref,
            start: header.start,
            duration: header.duration,
            events,
        };
        trace.check_shape()?;
        Ok(trace)
    }

    pub fn to_jsonl(&self) -> String {
        let mut out = serde_json::to_string(&Header {
            home_ref: self.home_ref.clone(),
            start: self.start,
            duration: self.duration,
        })
        .expect("header serializes");
        out.push('\n');
        for e in &self.events {
            out.push_str(&serde_json::to_string(e).expect("event serializes"));
            out.push('\n');
        }
        out
    }

    fn check_shape(&self) -> Result<(), SimError> {
        let mut last = i64::MIN;
        for (i, e) in self.events.iter().enumerate() {
            let t = self.offset_of(e.t);
            if t < last {
                return Err(SimError::UnsortedTrace { index: i });
            }
            if t > self.duration as i64 {
                return Err(SimError::EventAfterEnd { index: i });
            }
            if e.kind == TraceKind::Sensor && e.value.is_none() {
                return Err(SimError::MalformedTrace {
                    line: i + 2,
                    reason: "sensor event without value".into(),
                });
            }
            last = t;
        }
        Ok(())
    }

    /// Checks every target against the home and every reading's kind.
    pub fn validate(&self, home: &HomeConfig) -> Result<(), SimError> {
        self.check_shape()?;
        for e in &self.events {
            match e.kind {
                TraceKind::Sensor => {
                    let sensor = home
                        .resolve_sensor(&e.target)
                        .ok_or_else(|| SimError::UnknownSensorInTrace(e.target.clone()))?;
                    if let Some(v) = e.value {
                        v.validate(sensor)
                            .map_err(|err| SimError::Runtime(err.into()))?;
                    }
                }
                TraceKind::Activity => {
                    if let Some(l) = e.activity_label() {
                        if !home.has_activity(l) {
                            return Err(SimError::UnknownActivityInTrace(l.to_string()));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// Tick offsets: 0, interval, 2*interval, ... up to `duration`.
    pub fn tick_offsets(&self, interval: u64) -> impl Iterator<Item = i64> {
        (0..=self.duration).step_by(interval.max(1) as usize).map(|s| s as i64)
    }
}

//! The trigger condition language.
//!
//! A program is one event expression. Levels are conditions sampled every
//! tick; events are instants. The split is enforced by the grammar, so a
//! level can never stand where an event is required. See `docs/dsl.ebnf`.

mod ast;
mod format;
mod parser;

use std::fmt;
use std::ops::Deref;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use ast::{child_path, CmpOp, Event, Level, NodeRef, Step};
pub use parser::ParseError;

use crate::home::{HomeConfig, SensorKind};

/// A parsed trigger: the AST plus its source and canonical text.
#[derive(Debug, Clone, PartialEq)]
pub struct TriggerProgram {
    pub root: Event,
    pub source_text: String,
    pub canonical_text: String,
}

pub fn parse(text: &str) -> Result<TriggerProgram, ParseError> {
    let root = parser::parse_event(text)?;
    Ok(TriggerProgram::from_root(root, text.to_string()))
}

impl TriggerProgram {
    pub fn from_root(root: Event, source_text: String) -> Self {
        let canonical_text = root.to_string();
        TriggerProgram {
            root,
            source_text,
            canonical_text,
        }
    }
}

/// Deterministic canonical text of a program.
pub fn format(program: &TriggerProgram) -> String {
    program.root.to_string()
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TypeError {
    #[error("{path}: unknown sensor `{id}`")]
    UnknownSensor { id: String, path: String },
    #[error("{path}: unknown activity `{label}`")]
    UnknownActivity { label: String, path: String },
    #[error("{path}: {detail}")]
    KindMismatch { path: String, detail: String },
}

impl TypeError {
    pub fn code(&self) -> &'static str {
        match self {
            TypeError::UnknownSensor { .. } => "unknown_sensor",
            TypeError::UnknownActivity { .. } => "unknown_activity",
            TypeError::KindMismatch { .. } => "kind_mismatch",
        }
    }

    pub fn path(&self) -> &str {
        match self {
            TypeError::UnknownSensor { path, .. }
            | TypeError::UnknownActivity { path, .. }
            | TypeError::KindMismatch { path, .. } => path,
        }
    }
}

/// A program known to reference only sensors and activities of some home,
/// with comparisons only on numeric sensors.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidatedProgram(TriggerProgram);

impl Deref for ValidatedProgram {
    type Target = TriggerProgram;

    fn deref(&self) -> &TriggerProgram {
        &self.0
    }
}

impl ValidatedProgram {
    pub fn into_inner(self) -> TriggerProgram {
        self.0
    }
}

pub fn typecheck(
    program: &TriggerProgram,
    home: &HomeConfig,
) -> Result<ValidatedProgram, Vec<TypeError>> {
    let mut errors = Vec::new();
    program.root.walk("0", &mut |path, node| match node {
        NodeRef::Level(Level::Sensor(id)) => match home.resolve_sensor(id) {
            None => errors.push(TypeError::UnknownSensor {
                id: id.clone(),
                path: path.to_string(),
            }),
            Some(s) if !s.kind.is_boolean() => errors.push(TypeError::KindMismatch {
                path: path.to_string(),
                detail: format!(
                    "`{id}` is a {} sensor; compare it against a threshold",
                    s.kind.as_str()
                ),
            }),
            Some(_) => {}
        },
        NodeRef::Level(Level::Compare { sensor, .. }) => match home.resolve_sensor(sensor) {
            None => errors.push(TypeError::UnknownSensor {
                id: sensor.clone(),
                path: path.to_string(),
            }),
            Some(s) if s.kind != SensorKind::Power => errors.push(TypeError::KindMismatch {
                path: path.to_string(),
                detail: format!(
                    "`{sensor}` is a {} sensor; comparisons need a power sensor",
                    s.kind.as_str()
                ),
            }),
            Some(_) => {}
        },
        NodeRef::Level(Level::Active(a))
        | NodeRef::Event(Event::Started(a))
        | NodeRef::Event(Event::Ended(a))
            if !home.has_activity(a) =>
        {
            errors.push(TypeError::UnknownActivity {
                label: a.clone(),
                path: path.to_string(),
            });
        }
        _ => {}
    });
    if errors.is_empty() {
        Ok(ValidatedProgram(program.clone()))
    } else {
        Err(errors)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TriggerKind {
    TimeBased,
    ActivityBased,
    SensorBased,
    StateMachine,
}

impl TriggerKind {
    pub const ALL: [TriggerKind; 4] = [
        TriggerKind::TimeBased,
        TriggerKind::ActivityBased,
        TriggerKind::SensorBased,
        TriggerKind::StateMachine,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            TriggerKind::TimeBased => "time_based",
            TriggerKind::ActivityBased => "activity_based",
            TriggerKind::SensorBased => "sensor_based",
            TriggerKind::StateMachine => "state_machine",
        }
    }
}

impl fmt::Display for TriggerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Classifies by the primary triggering mechanism. `when` gates and
/// `between` are secondary conditions and never change the class.
pub fn classify(program: &ValidatedProgram) -> TriggerKind {
    classify_event(&program.root)
}

pub(crate) fn classify_event(root: &Event) -> TriggerKind {
    let mut stateful = false;
    root.walk("0", &mut |_, node| {
        if let NodeRef::Event(Event::Seq { .. } | Event::Held(..) | Event::After { .. }) = node {
            stateful = true;
        }
    });
    if stateful {
        return TriggerKind::StateMachine;
    }
    let mut primary = root;
    while let Event::When(inner, _) = primary {
        primary = inner;
    }
    match primary {
        Event::Started(_) | Event::Ended(_) => TriggerKind::ActivityBased,
        Event::Rising(l) | Event::Falling(l) => {
            let (mut activity, mut sensor) = (false, false);
            l.walk("0", &mut |_, node| match node {
                NodeRef::Level(Level::Active(_)) => activity = true,
                NodeRef::Level(Level::Sensor(_) | Level::Compare { .. }) => sensor = true,
                _ => {}
            });
            if activity {
                TriggerKind::ActivityBased
            } else if sensor {
                TriggerKind::SensorBased
            } else {
                TriggerKind::TimeBased
            }
        }
        _ => TriggerKind::TimeBased,
    }
}

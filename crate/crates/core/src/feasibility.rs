//! Whether a WHEN spec can be detected in a given home, and what to offer
//! instead when it cannot.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::dsl::{self, TypeError};
use crate::home::HomeConfig;
use crate::intent::phrases::{words, Lexicon};
use crate::intent::{compile_when, describe, ActivityPhase, WhenSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReasonCode {
    Ok,
    BeforeActivity,
    UnknownActivity,
    UnknownSensor,
    UninstrumentedLocation,
    InvalidTrigger,
}

impl ReasonCode {
    pub fn as_str(self) -> &'static str {
        match self {
            ReasonCode::Ok => "ok",
            ReasonCode::BeforeActivity => "before_activity",
            ReasonCode::UnknownActivity => "unknown_activity",
            ReasonCode::UnknownSensor => "unknown_sensor",
            ReasonCode::UninstrumentedLocation => "uninstrumented_location",
            ReasonCode::InvalidTrigger => "invalid_trigger",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Suggestion {
    pub phrase: String,
    pub spec: WhenSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityVerdict {
    pub feasible: bool,
    /// Empty when feasible.
    pub reason: String,
    pub code: ReasonCode,
    pub suggestions: Vec<Suggestion>,
}

fn spaced(label: &str) -> String {
    label.replace('_', " ")
}

/// The rule-only part of the verdict: (code, reason).
fn judge(spec: &WhenSpec, home: &HomeConfig) -> (ReasonCode, String) {
    let ok = (ReasonCode::Ok, String::new());
    match spec {
        WhenSpec::ClockTime { .. } | WhenSpec::InferredTime { .. } => ok,
        WhenSpec::BeforeActivity { label } => (
            ReasonCode::BeforeActivity,
            format!(
                "I can't know ahead of time that you are about to be {}: the start of an activity can be detected but not predicted.",
                spaced(label)
            ),
        ),
        WhenSpec::ActivityEvent { label, .. } => {
            if home.has_activity(label) {
                ok
            } else {
                unknown_activity(label)
            }
        }
        WhenSpec::SensorEvent { .. } | WhenSpec::SequenceSpec { .. } => match compile_when(spec) {
            Err(e) => (ReasonCode::InvalidTrigger, format!("That trigger is not valid ({e}).")),
            Ok(event) => judge_program(event, home),
        },
        WhenSpec::Delay { base, .. } => judge(base, home),
    }
}

fn unknown_activity(label: &str) -> (ReasonCode, String) {
    (
        ReasonCode::UnknownActivity,
        format!("This home has no way to recognize \"{}\".", spaced(label)),
    )
}

fn judge_program(event: dsl::Event, home: &HomeConfig) -> (ReasonCode, String) {
    let program = dsl::TriggerProgram::from_root(event, String::new());
    if let Err(errors) = dsl::typecheck(&program, home) {
        return match &errors[0] {
            TypeError::UnknownSensor { id, .. } => (
                ReasonCode::UnknownSensor,
                format!("There is no sensor called `{id}` in this home."),
            ),
            TypeError::UnknownActivity { label, .. } => unknown_activity(label),
            e @ TypeError::KindMismatch { .. } => (
                ReasonCode::InvalidTrigger,
                format!("That trigger is not valid ({e})."),
            ),
        };
    }
    for label in program.root.activity_labels() {
        let Some(activity) = home.resolve_activity(label) else {
            continue;
        };
        if let Some(loc) = activity.locations.iter().find(|l| !home.is_instrumented(l)) {
            return (
                ReasonCode::UninstrumentedLocation,
                format!(
                    "There are no sensors in the {}, so {} can't be watched there.",
                    spaced(loc),
                    spaced(label)
                ),
            );
        }
    }
    (ReasonCode::Ok, String::new())
}

pub fn check_feasibility(spec: &WhenSpec, home: &HomeConfig) -> FeasibilityVerdict {
    let (code, reason) = judge(spec, home);
    let feasible = code == ReasonCode::Ok;
    let wants_help = !feasible || matches!(spec, WhenSpec::InferredTime { .. });
    FeasibilityVerdict {
        feasible,
        reason,
        code,
        suggestions: if wants_help {
            suggest_alternatives(spec, home)
        } else {
            Vec::new()
        },
    }
}

fn is_feasible(spec: &WhenSpec, home: &HomeConfig) -> bool {
    judge(spec, home).0 == ReasonCode::Ok
}

/// How to say `spec` to the user: the shortest configured phrase that maps
/// to the same trigger, else a generated description.
pub fn phrase_for(spec: &WhenSpec, home: &HomeConfig) -> String {
    if let (false, Ok(event)) = (spec.is_time_based(), compile_when(spec)) {
        let canonical = event.to_string();
        let configured = home
            .event_phrases
            .iter()
            .filter(|(_, snippet)| {
                dsl::parse(snippet).is_ok_and(|p| p.root.to_string() == canonical)
            })
            .map(|(phrase, _)| phrase)
            .min_by_key(|p| (p.split_whitespace().count(), p.as_str()));
        if let Some(p) = configured {
            return p.clone();
        }
    }
    describe::when_phrase(spec)
}

/// A contact sensor standing in for "the person is at the door".
fn front_door(home: &HomeConfig) -> Option<&str> {
    let contacts = || {
        home.sensors
            .iter()
            .filter(|s| s.kind == crate::home::SensorKind::Contact)
    };
    contacts()
        .find(|s| s.id.contains("front_door"))
        .or_else(|| contacts().find(|s| s.location == "entrance"))
        .map(|s| s.id.as_str())
}

/// Configured activities whose label or an alias is a near misspelling of
/// `label`.
fn similar_activities(label: &str, home: &HomeConfig) -> Vec<String> {
    let target = spaced(label);
    let mut scored: Vec<(f64, &str)> = home
        .activities
        .iter()
        .map(|a| {
            let best = std::iter::once(spaced(&a.label))
                .chain(a.aliases.iter().cloned())
                .map(|name| strsim::normalized_levenshtein(&target, &name))
                .fold(0.0, f64::max);
            (best, a.label.as_str())
        })
        .filter(|(score, _)| *score >= 0.75)
        .collect();
    scored.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(b.1)));
    scored.into_iter().map(|(_, l)| l.to_string()).take(2).collect()
}

/// Feasible alternatives for an infeasible or vague spec. Feasible,
/// non-vague specs get none.
pub fn suggest_alternatives(spec: &WhenSpec, home: &HomeConfig) -> Vec<Suggestion> {
    let mut specs: Vec<WhenSpec> = Vec::new();
    match spec {
        WhenSpec::BeforeActivity { label } => {
            if label == "leaving_home" || label == "entering_home" {
                if let Some(id) = front_door(home) {
                    specs.push(WhenSpec::SensorEvent {
                        dsl: format!("rising(sensor({id}))"),
                    });
                }
            }
            specs.push(WhenSpec::ActivityEvent {
                label: label.clone(),
                phase: ActivityPhase::Start,
            });
        }
        WhenSpec::InferredTime { phrase, window } => {
            let toks = words(phrase);
            let lex = Lexicon::new(home);
            let phase = if toks.first().is_some_and(|w| w == "after") {
                ActivityPhase::End
            } else {
                ActivityPhase::Start
            };
            if let Some(label) = (0..toks.len()).find_map(|i| lex.alias(&toks, i).map(|(_, l)| l)) {
                specs.push(WhenSpec::ActivityEvent {
                    label: label.to_string(),
                    phase,
                });
            }
            specs.push(WhenSpec::ClockTime {
                time: window.anchor_time(),
            });
        }
        WhenSpec::ActivityEvent { label, phase } if !home.has_activity(label) => {
            for l in similar_activities(label, home) {
                specs.push(WhenSpec::ActivityEvent {
                    label: l,
                    phase: *phase,
                });
            }
        }
        WhenSpec::Delay { base, delay } if !is_feasible(base, home) => {
            for s in suggest_alternatives(base, home) {
                specs.push(WhenSpec::Delay {
                    base: Box::new(s.spec),
                    delay: *delay,
                });
            }
        }
        _ => {}
    }
    let mut seen = BTreeSet::new();
    specs
        .into_iter()
        .filter(|s| is_feasible(s, home))
        .map(|s| Suggestion {
            phrase: phrase_for(&s, home),
            spec: s,
        })
        .filter(|s| seen.insert(s.phrase.clone()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::NaiveTime;

    fn home() -> HomeConfig {
        HomeConfig::sample_home()
    }

    fn t(h: u32, m: u32) -> NaiveTime {
        NaiveTime::from_hms_opt(h, m, 0).unwrap()
    }

    #[test]
    fn clock_is_feasible_without_suggestions() {
        let v = check_feasibility(&WhenSpec::ClockTime { time: t(19, 0) }, &home());
        assert!(v.feasible);
        assert!(v.reason.is_empty());
        assert!(v.suggestions.is_empty());
    }

    #[test]
    fn leaving_gets_door_proxy_first() {
        let spec = WhenSpec::BeforeActivity {
            label: "leaving_home".into(),
        };
        let v = check_feasibility(&spec, &home());
        assert!(!v.feasible);
        assert_eq!(v.code, ReasonCode::BeforeActivity);
        let phrases: Vec<&str> = v.suggestions.iter().map(|s| s.phrase.as_str()).collect();
        assert_eq!(phrases, ["when the front door opens", "when you start leaving"]);
        assert_eq!(
            v.suggestions[0].spec,
            WhenSpec::SensorEvent {
                dsl: "rising(sensor(contact_front_door))".into()
            }
        );
    }

    #[test]
    fn vague_meal_suggestions() {
        let window = home().time_mappings["dinner"];
        let spec = WhenSpec::InferredTime {
            phrase: "after dinner".into(),
            window,
        };
        let s = suggest_alternatives(&spec, &home());
        assert_eq!(s.len(), 2);
        assert_eq!(s[0].phrase, "when you finish eating");
        assert_eq!(
            s[0].spec,
            WhenSpec::ActivityEvent {
                label: "eating".into(),
                phase: ActivityPhase::End
            }
        );
        assert_eq!(s[1].phrase, "at 20:00");
        assert_eq!(s[1].spec, WhenSpec::ClockTime { time: t(20, 0) });
    }

    #[test]
    fn unknown_activity() {
        let v = check_feasibility(
            &WhenSpec::ActivityEvent {
                label: "jogging".into(),
                phase: ActivityPhase::Start,
            },
            &home(),
        );
        assert_eq!(v.code, ReasonCode::UnknownActivity);
        assert!(v.suggestions.is_empty());
        let v = check_feasibility(
            &WhenSpec::ActivityEvent {
                label: "sleping".into(),
                phase: ActivityPhase::End,
            },
            &home(),
        );
        assert_eq!(v.suggestions.len(), 1);
        assert_eq!(v.suggestions[0].phrase, "when you wake up");
    }

    #[test]
    fn sensor_rules() {
        let code = |dsl: &str| {
            check_feasibility(&WhenSpec::SensorEvent { dsl: dsl.into() }, &home()).code
        };
        assert_eq!(code("rising(sensor(contact_front_door))"), ReasonCode::Ok);
        assert_eq!(code("rising(sensor(contact_garage))"), ReasonCode::UnknownSensor);
        assert_eq!(code("rising(active(sleeping))"), ReasonCode::UninstrumentedLocation);
        assert_eq!(code("rising(sensor(plug_microwave))"), ReasonCode::InvalidTrigger);
        assert_eq!(code("rising("), ReasonCode::InvalidTrigger);
    }
}

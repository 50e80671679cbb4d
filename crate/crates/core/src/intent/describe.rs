//! English descriptions of trigger expressions, for read-back sentences.
//!
//! Sensor names come from id conventions: `contact_*` opens and closes,
//! `plug_*` starts and stops, `motion_*` detects motion.

use super::{compile_when, ActivityPhase, WhenSpec};
use crate::clock::format_hhmm;
use crate::dsl::{CmpOp, Event, Level, Step};

fn spaced(id: &str) -> String {
    id.replace('_', " ")
}

fn device(id: &str) -> (Option<&'static str>, String) {
    for prefix in ["contact", "plug", "motion"] {
        if let Some(rest) = id.strip_prefix(prefix).and_then(|r| r.strip_prefix('_')) {
            return (Some(prefix), format!("the {}", spaced(rest)));
        }
    }
    (None, format!("the {}", spaced(id)))
}

/// A level as a state ("the front door is open").
pub fn describe_level(level: &Level) -> String {
    match level {
        Level::Sensor(id) => match device(id) {
            (Some("contact"), name) => format!("{name} is open"),
            (Some("motion"), name) => format!("there is motion in {name}"),
            (_, name) => format!("{name} is on"),
        },
        Level::Not(inner) => match inner.as_ref() {
            Level::Sensor(id) if id.starts_with("contact_") => {
                format!("{} is closed", device(id).1)
            }
            Level::Sensor(id) if id.starts_with("motion_") => {
                format!("there is no motion in {}", device(id).1)
            }
            other => format!("not ({})", describe_level(other)),
        },
        Level::Compare {
            sensor,
            op,
            threshold,
        } => {
            let name = device(sensor).1;
            let on = matches!(op, CmpOp::Gt | CmpOp::Ge);
            if sensor.starts_with("plug_") || sensor.ends_with("_activity") {
                let name = name.trim_end_matches(" activity");
                format!("{name} is {}", if on { "on" } else { "off" })
            } else {
                format!("{name} is {} {}", op.as_str(), threshold)
            }
        }
        Level::Active(a) => format!("{} is in progress", spaced(a)),
        Level::Between(from, to) => {
            format!("it is between {} and {}", format_hhmm(*from), format_hhmm(*to))
        }
        Level::And(a, b) => format!("{} and {}", describe_level(a), describe_level(b)),
        Level::Or(a, b) => format!("{} or {}", describe_level(a), describe_level(b)),
    }
}

fn describe_edge(level: &Level, rising: bool) -> String {
    match level {
        Level::Sensor(id) => match device(id) {
            (Some("contact"), name) => format!("{name} {}", if rising { "opens" } else { "closes" }),
            (Some("motion"), name) => {
                if rising {
                    format!("motion is detected in {name}")
                } else {
                    format!("motion stops in {name}")
                }
            }
            (_, name) => format!("{name} {}", if rising { "turns on" } else { "turns off" }),
        },
        Level::Compare { sensor, op, .. } if sensor.starts_with("plug_") => {
            let up = rising == matches!(op, CmpOp::Gt | CmpOp::Ge);
            format!("{} {}", device(sensor).1, if up { "starts" } else { "stops" })
        }
        Level::Active(a) => format!("{} {}", spaced(a), if rising { "starts" } else { "ends" }),
        other => {
            let state = describe_level(other);
            if rising {
                format!("{state} becomes true")
            } else {
                format!("{state} stops being true")
            }
        }
    }
}

/// An event as a clause ("the microwave stops").
pub fn describe_event(event: &Event) -> String {
    match event {
        Event::At(t) => format_hhmm(*t),
        Event::Rising(l) => describe_edge(l, true),
        Event::Falling(l) => describe_edge(l, false),
        Event::Started(a) => format!("{} starts", spaced(a)),
        Event::Ended(a) => format!("{} ends", spaced(a)),
        Event::Held(l, d) => format!("{} for {d}", describe_level(l)),
        Event::After {
            event,
            delay,
            cancel,
        } => {
            let mut s = format!("{delay} after {}", describe_event(event));
            if let Some(c) = cancel {
                s.push_str(&format!(" unless {}", describe_level(c)));
            }
            s
        }
        Event::Seq { steps, within } => {
            let parts: Vec<String> = steps
                .iter()
                .map(|s| match s {
                    Step::Event(e) => describe_event(e),
                    Step::Hold(l, d) => format!("{} for {d}", describe_level(l)),
                })
                .collect();
            let mut s = parts.join(", then ");
            if let Some(w) = within {
                s.push_str(&format!(", all within {w}"));
            }
            s
        }
        Event::When(e, g) => format!("{} while {}", describe_event(e), describe_level(g)),
    }
}

fn clause(spec: &WhenSpec) -> String {
    match spec {
        WhenSpec::ClockTime { time } => format_hhmm(*time),
        WhenSpec::InferredTime { phrase, .. } => phrase.clone(),
        WhenSpec::ActivityEvent { label, phase } => format!(
            "{} {}",
            spaced(label),
            match phase {
                ActivityPhase::Start => "starts",
                ActivityPhase::End => "ends",
            }
        ),
        WhenSpec::BeforeActivity { label } => spaced(label),
        other => match compile_when(other) {
            Ok(e) => describe_event(&e),
            Err(_) => String::from("the condition holds"),
        },
    }
}

/// The WHEN part of a read-back sentence.
pub(crate) fn when_phrase(spec: &WhenSpec) -> String {
    match spec {
        WhenSpec::ClockTime { time } => format!("at {}", format_hhmm(*time)),
        WhenSpec::InferredTime { phrase, window } => {
            format!("{phrase} ({})", format_hhmm(window.anchor_time()))
        }
        WhenSpec::BeforeActivity { label } => format!("before {}", spaced(label)),
        WhenSpec::Delay { base, delay } => format!("{delay} after {}", clause(base)),
        other => format!("when {}", clause(other)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(src: &str) -> String {
        describe_event(&crate::dsl::parse(src).unwrap().root)
    }

    #[test]
    fn sensor_conventions() {
        assert_eq!(d("falling(sensor(plug_microwave) > 1.0)"), "the microwave stops");
        assert_eq!(d("rising(sensor(contact_front_door))"), "the front door opens");
        assert_eq!(
            d("rising(sensor(contact_front_door)) when sensor(stove_activity) > 0.5"),
            "the front door opens while the stove is on"
        );
        assert_eq!(
            d("seq(rising(sensor(plug_microwave) > 1.0), falling(sensor(plug_microwave) > 1.0), hold(not sensor(contact_microwave_door), 180s))"),
            "the microwave starts, then the microwave stops, then the microwave door is closed for 180s"
        );
    }
}

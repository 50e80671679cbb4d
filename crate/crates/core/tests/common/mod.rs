//! Seeded generators shared by the property and acceptance suites.
#![allow(dead_code)]

use chrono::{Duration, NaiveDate, NaiveDateTime, NaiveTime};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use remind_core::clock::Seconds;
use remind_core::dsl::{CmpOp, Event, Level, Step};
use remind_core::home::{load_home_config, HomeConfig, SensorValue};
use remind_core::simulator::{Trace, TraceEvent};

#[allow(unused_imports)]
pub use rand::SeedableRng;
pub type Rng8 = ChaCha8Rng;

pub const BOOL_SENSORS: [&str; 3] = ["contact_a", "contact_b", "motion_hall"];
pub const POWER_SENSORS: [&str; 2] = ["plug_a", "plug_b"];
pub const ACTIVITIES: [&str; 3] = ["cooking", "eating", "sleeping"];

pub fn fuzz_home() -> HomeConfig {
    load_home_config(
        r#"{
        "sensors": [
            {"id": "contact_a", "kind": "contact", "location": "kitchen"},
            {"id": "contact_b", "kind": "contact", "location": "entrance"},
            {"id": "motion_hall", "kind": "motion", "location": "hall"},
            {"id": "plug_a", "kind": "power", "location": "kitchen"},
            {"id": "plug_b", "kind": "power", "location": "living_room"}
        ],
        "activities": [
            {"label": "cooking", "locations": ["kitchen"]},
            {"label": "eating", "locations": ["kitchen"]},
            {"label": "sleeping", "locations": ["bedroom"]}
        ]}"#,
    )
    .unwrap()
}

pub fn day() -> NaiveDate {
    NaiveDate::from_ymd_opt(2026, 10, 15).unwrap()
}

const THRESHOLDS: [f64; 4] = [0.5, 1.0, 2.5, 0.0];
const READINGS: [f64; 5] = [0.0, 0.3, 0.9, 1.7, 3.2];

/// Clock times the fuzz traces actually pass through.
fn near_time(rng: &mut Rng8, start: NaiveDateTime, span: i64) -> NaiveTime {
    let off = rng.gen_range(-60..span + 60);
    let t = (start + Duration::seconds(off)).time();
    NaiveTime::from_hms_opt(
        chrono::Timelike::hour(&t),
        chrono::Timelike::minute(&t),
        0,
    )
    .unwrap()
}

fn secs(rng: &mut Rng8, max: u64) -> Seconds {
    Seconds::new(rng.gen_range(1..=max)).unwrap()
}

pub struct ProgramGen {
    pub start: NaiveDateTime,
    pub span: i64,
    pub max_delay: u64,
}

impl ProgramGen {
    pub fn level(&self, rng: &mut Rng8, depth: u32) -> Level {
        if depth <= 1 || rng.gen_bool(0.45) {
            return match rng.gen_range(0..4) {
                0 => Level::Sensor(BOOL_SENSORS.choose(rng).unwrap().to_string()),
                1 => Level::Compare {
                    sensor: POWER_SENSORS.choose(rng).unwrap().to_string(),
                    op: *[CmpOp::Gt, CmpOp::Ge, CmpOp::Lt, CmpOp::Le].choose(rng).unwrap(),
                    threshold: *THRESHOLDS.choose(rng).unwrap(),
                },
                2 => Level::Active(ACTIVITIES.choose(rng).unwrap().to_string()),
                _ => Level::Between(
                    near_time(rng, self.start, self.span),
                    near_time(rng, self.start, self.span),
                ),
            };
        }
        match rng.gen_range(0..3) {
            0 => Level::not(self.level(rng, depth - 1)),
            1 => Level::and(self.level(rng, depth - 1), self.level(rng, depth - 1)),
            _ => Level::or(self.level(rng, depth - 1), self.level(rng, depth - 1)),
        }
    }

    /// An event whose tree (events and levels) is at most `depth` deep.
    pub fn event(&self, rng: &mut Rng8, depth: u32) -> Event {
        let depth = depth.max(1);
        if depth == 1 {
            return match rng.gen_range(0..3) {
                0 => Event::At(near_time(rng, self.start, self.span)),
                1 => Event::Started(ACTIVITIES.choose(rng).unwrap().to_string()),
                _ => Event::Ended(ACTIVITIES.choose(rng).unwrap().to_string()),
            };
        }
        match rng.gen_range(0..10) {
            0 => Event::At(near_time(rng, self.start, self.span)),
            1 => Event::Started(ACTIVITIES.choose(rng).unwrap().to_string()),
            2 => Event::Ended(ACTIVITIES.choose(rng).unwrap().to_string()),
            3 => Event::Rising(self.level(rng, depth - 1)),
            4 => Event::Falling(self.level(rng, depth - 1)),
            5 => Event::Held(self.level(rng, depth - 1), secs(rng, self.max_delay)),
            6 => Event::After {
                event: Box::new(self.event(rng, depth - 1)),
                delay: secs(rng, self.max_delay),
                cancel: rng.gen_bool(0.4).then(|| self.level(rng, depth - 1)),
            },
            7 => {
                let n = rng.gen_range(2..=3);
                let steps = (0..n)
                    .map(|_| {
                        if depth >= 3 && rng.gen_bool(0.35) {
                            Step::Hold(self.level(rng, depth - 2), secs(rng, self.max_delay))
                        } else {
                            Step::Event(self.event(rng, depth - 1))
                        }
                    })
                    .collect();
                Event::Seq {
                    steps,
                    within: rng.gen_bool(0.5).then(|| secs(rng, 25)),
                }
            }
            _ => Event::When(
                Box::new(self.event(rng, depth - 1)),
                self.level(rng, depth - 1),
            ),
        }
    }
}

/// Depth of an expression tree, counting every event and level node.
pub fn depth(event: &Event) -> u32 {
    fn level(l: &Level) -> u32 {
        1 + match l {
            Level::Not(a) => level(a),
            Level::And(a, b) | Level::Or(a, b) => level(a).max(level(b)),
            _ => 0,
        }
    }
    1 + match event {
        Event::At(_) | Event::Started(_) | Event::Ended(_) => 0,
        Event::Rising(l) | Event::Falling(l) | Event::Held(l, _) => level(l),
        Event::After { event, cancel, .. } => {
            depth(event).max(cancel.as_ref().map_or(0, level))
        }
        Event::Seq { steps, .. } => steps
            .iter()
            .map(|s| match s {
                Step::Event(e) => depth(e),
                Step::Hold(l, _) => 1 + level(l),
            })
            .max()
            .unwrap_or(0),
        Event::When(e, g) => depth(e).max(level(g)),
    }
}

/// A random trace of `ticks` ticks over the fuzz home. Changes are sparse
/// so that holds and timers both complete and get interrupted.
pub fn random_trace(rng: &mut Rng8, start: NaiveDateTime, ticks: u64, interval: u64) -> Trace {
    let duration = (ticks - 1) * interval;
    let mut events = Vec::new();
    let change_rate = rng.gen_range(0.01..0.2);
    for t in 0..=duration {
        if !rng.gen_bool(change_rate) {
            continue;
        }
        match rng.gen_range(0..3) {
            0 => events.push(TraceEvent::sensor(
                t,
                BOOL_SENSORS.choose(rng).unwrap(),
                SensorValue::Bool(rng.gen_bool(0.5)),
            )),
            1 => events.push(TraceEvent::sensor(
                t,
                POWER_SENSORS.choose(rng).unwrap(),
                SensorValue::Amps(*READINGS.choose(rng).unwrap()),
            )),
            _ => {
                let label = if rng.gen_bool(0.3) {
                    None
                } else {
                    Some(*ACTIVITIES.choose(rng).unwrap())
                };
                events.push(TraceEvent::activity(t, label));
            }
        }
    }
    Trace::new(start, duration, events)
}

/// A start time somewhere in the day, sometimes just before midnight.
pub fn random_start(rng: &mut Rng8) -> NaiveDateTime {
    let base = day().and_hms_opt(0, 0, 0).unwrap();
    if rng.gen_bool(0.3) {
        base + Duration::seconds(86_400 - rng.gen_range(60..1_800))
    } else {
        base + Duration::seconds(rng.gen_range(0..86_400))
    }
}

/// Random identifier for parser round-trips.
pub fn ident(rng: &mut Rng8) -> String {
    const WORDS: [&str; 8] = ["door", "plug", "stove", "tv", "x", "kettle_2", "a_b_c", "z9"];
    let w = WORDS.choose(rng).unwrap();
    if rng.gen_bool(0.5) {
        format!("{w}_{}", rng.gen_range(0..10))
    } else {
        w.to_string()
    }
}

/// Any syntactically valid program (not type-checked), for round-trips.
pub fn syntax_event(rng: &mut Rng8, depth: u32) -> Event {
    let time = |rng: &mut Rng8| {
        NaiveTime::from_hms_opt(rng.gen_range(0..24), rng.gen_range(0..60), 0).unwrap()
    };
    fn syntax_level(rng: &mut Rng8, depth: u32) -> Level {
        if depth <= 1 || rng.gen_bool(0.4) {
            return match rng.gen_range(0..4) {
                0 => Level::Sensor(ident(rng)),
                1 => Level::Compare {
                    sensor: ident(rng),
                    op: *[CmpOp::Gt, CmpOp::Ge, CmpOp::Lt, CmpOp::Le].choose(rng).unwrap(),
                    threshold: match rng.gen_range(0..3) {
                        0 => rng.gen_range(0..50) as f64,
                        1 => rng.gen_range(0..10_000) as f64 / 100.0,
                        _ => rng.gen_range(-1e3..1e3),
                    },
                },
                2 => Level::Active(ident(rng)),
                _ => Level::Between(
                    NaiveTime::from_hms_opt(rng.gen_range(0..24), rng.gen_range(0..60), 0)
                        .unwrap(),
                    NaiveTime::from_hms_opt(rng.gen_range(0..24), rng.gen_range(0..60), 0)
                        .unwrap(),
                ),
            };
        }
        match rng.gen_range(0..3) {
            0 => Level::not(syntax_level(rng, depth - 1)),
            1 => Level::and(syntax_level(rng, depth - 1), syntax_level(rng, depth - 1)),
            _ => Level::or(syntax_level(rng, depth - 1), syntax_level(rng, depth - 1)),
        }
    }
    if depth <= 1 {
        return match rng.gen_range(0..3) {
            0 => Event::At(time(rng)),
            1 => Event::Started(ident(rng)),
            _ => Event::Ended(ident(rng)),
        };
    }
    let d = |rng: &mut Rng8| Seconds::new(rng.gen_range(1..100_000)).unwrap();
    match rng.gen_range(0..9) {
        0 => Event::At(time(rng)),
        1 => Event::Started(ident(rng)),
        2 => Event::Rising(syntax_level(rng, depth - 1)),
        3 => Event::Falling(syntax_level(rng, depth - 1)),
        4 => Event::Held(syntax_level(rng, depth - 1), d(rng)),
        5 => Event::After {
            event: Box::new(syntax_event(rng, depth - 1)),
            delay: d(rng),
            cancel: rng.gen_bool(0.5).then(|| syntax_level(rng, depth - 1)),
        },
        6 => {
            let n = rng.gen_range(2..=4);
            Event::Seq {
                steps: (0..n)
                    .map(|_| {
                        if rng.gen_bool(0.3) {
                            Step::Hold(syntax_level(rng, depth - 1), d(rng))
                        } else {
                            Step::Event(syntax_event(rng, depth - 1))
                        }
                    })
                    .collect(),
                within: rng.gen_bool(0.5).then(|| d(rng)),
            }
        }
        _ => Event::When(
            Box::new(syntax_event(rng, depth - 1)),
            syntax_level(rng, depth - 1),
        ),
    }
}

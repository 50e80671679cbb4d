//! Reference semantics computed over the whole materialized trace.
//!
//! Nothing here keeps per-tick state between evaluations: every node becomes
//! a boolean vector indexed by tick, derived from the vectors of its
//! children and the table of readings. Timers and dwell conditions are found
//! by scanning backwards through history. Only `seq` is replayed forward,
//! and then over the precomputed step vectors.

use std::collections::BTreeMap;

use chrono::{Duration, NaiveDateTime, NaiveTime};

use super::trace::{Trace, TraceKind};
use crate::clock::Seconds;
use crate::dsl::{CmpOp, Event, Level, Step};
use crate::home::SensorValue;

/// Readings at every tick of a simulation.
#[derive(Debug, Clone)]
pub struct Table {
    pub offsets: Vec<i64>,
    pub times: Vec<NaiveDateTime>,
    pub readings: Vec<BTreeMap<String, SensorValue>>,
    pub activity: Vec<Option<String>>,
}

impl Table {
    pub fn materialize(trace: &Trace, interval: u64) -> Table {
        let mut table = Table {
            offsets: Vec::new(),
            times: Vec::new(),
            readings: Vec::new(),
            activity: Vec::new(),
        };
        let mut readings = BTreeMap::new();
        let mut activity = None;
        let mut next = 0;
        for offset in trace.tick_offsets(interval) {
            while next < trace.events.len() && trace.offset_of(trace.events[next].t) <= offset {
                let e = &trace.events[next];
                match e.kind {
                    TraceKind::Sensor => {
                        if let Some(v) = e.value {
                            readings.insert(e.target.clone(), v);
                        }
                    }
                    TraceKind::Activity => activity = e.activity_label().map(str::to_string),
                }
                next += 1;
            }
            table.offsets.push(offset);
            table.times.push(trace.time_of(offset));
            table.readings.push(readings.clone());
            table.activity.push(activity.clone());
        }
        table
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

fn truthy(v: Option<&SensorValue>) -> bool {
    match v {
        None => false,
        Some(SensorValue::Bool(b)) => *b,
        Some(SensorValue::Amps(a)) => *a > 0.0,
    }
}

fn numeric(v: Option<&SensorValue>) -> f64 {
    match v {
        None => 0.0,
        Some(SensorValue::Bool(true)) => 1.0,
        Some(SensorValue::Bool(false)) => 0.0,
        Some(SensorValue::Amps(a)) => *a,
    }
}

fn compare(op: CmpOp, x: f64, threshold: f64) -> bool {
    match op {
        CmpOp::Gt => x > threshold,
        CmpOp::Ge => x >= threshold,
        CmpOp::Lt => x < threshold,
        CmpOp::Le => x <= threshold,
    }
}

fn clock_in_window(t: NaiveTime, from: NaiveTime, to: NaiveTime) -> bool {
    match from.cmp(&to) {
        std::cmp::Ordering::Equal => false,
        std::cmp::Ordering::Less => t >= from && t < to,
        std::cmp::Ordering::Greater => !(t >= to && t < from),
    }
}

pub fn level_vector(level: &Level, table: &Table) -> Vec<bool> {
    let n = table.len();
    match level {
        Level::Sensor(id) => (0..n).map(|k| truthy(table.readings[k].get(id))).collect(),
        Level::Compare {
            sensor,
            op,
            threshold,
        } => (0..n)
            .map(|k| compare(*op, numeric(table.readings[k].get(sensor)), *threshold))
            .collect(),
        Level::Active(a) => table
            .activity
            .iter()
            .map(|cur| cur.as_deref() == Some(a.as_str()))
            .collect(),
        Level::Between(from, to) => table
            .times
            .iter()
            .map(|t| clock_in_window(t.time(), *from, *to))
            .collect(),
        Level::Not(a) => level_vector(a, table).into_iter().map(|x| !x).collect(),
        Level::And(a, b) => zip_with(level_vector(a, table), level_vector(b, table), |x, y| x && y),
        Level::Or(a, b) => zip_with(level_vector(a, table), level_vector(b, table), |x, y| x || y),
    }
}

fn zip_with(a: Vec<bool>, b: Vec<bool>, f: impl Fn(bool, bool) -> bool) -> Vec<bool> {
    a.into_iter().zip(b).map(|(x, y)| f(x, y)).collect()
}

fn dur(s: Seconds) -> Duration {
    Duration::seconds(s.get() as i64)
}

fn rising_of(v: &[bool]) -> Vec<bool> {
    (0..v.len()).map(|k| v[k] && (k == 0 || !v[k - 1])).collect()
}

fn falling_of(v: &[bool]) -> Vec<bool> {
    (0..v.len()).map(|k| !v[k] && k > 0 && v[k - 1]).collect()
}

pub fn event_vector(event: &Event, table: &Table) -> Vec<bool> {
    let n = table.len();
    let times = &table.times;
    match event {
        Event::At(t) => (0..n)
            .map(|k| {
                let day = times[k].date();
                times[k].time() >= *t
                    && !(0..k).any(|j| times[j].date() == day && times[j].time() >= *t)
            })
            .collect(),
        Event::Rising(l) => rising_of(&level_vector(l, table)),
        Event::Falling(l) => falling_of(&level_vector(l, table)),
        Event::Started(a) => rising_of(&level_vector(&Level::Active(a.clone()), table)),
        Event::Ended(a) => falling_of(&level_vector(&Level::Active(a.clone()), table)),
        Event::Held(l, d) => {
            let v = level_vector(l, table);
            (0..n)
                .map(|k| {
                    if !v[k] {
                        return false;
                    }
                    let mut s = k;
                    while s > 0 && v[s - 1] {
                        s -= 1;
                    }
                    let reached = |j: usize| times[j] - times[s] >= dur(*d);
                    reached(k) && !(s..k).any(reached)
                })
                .collect()
        }
        Event::After {
            event: inner,
            delay,
            cancel,
        } => {
            let ev = event_vector(inner, table);
            let cancelled = match cancel {
                Some(c) => level_vector(c, table),
                None => vec![false; n],
            };
            (0..n)
                .map(|k| {
                    let Some(j) = (0..k).rev().find(|&j| ev[j]) else {
                        return false;
                    };
                    let deadline = times[j] + dur(*delay);
                    times[k] >= deadline
                        && !(j + 1..=k).any(|m| cancelled[m])
                        && !(j + 1..k).any(|m| times[m] >= deadline)
                })
                .collect()
        }
        Event::Seq { steps, within } => replay_seq(steps, *within, table),
        Event::When(inner, gate) => zip_with(
            event_vector(inner, table),
            level_vector(gate, table),
            |x, y| x && y,
        ),
    }
}

fn replay_seq(steps: &[Step], within: Option<Seconds>, table: &Table) -> Vec<bool> {
    let n = table.len();
    let times = &table.times;
    let vectors: Vec<Vec<bool>> = steps
        .iter()
        .map(|s| match s {
            Step::Event(e) => event_vector(e, table),
            Step::Hold(l, _) => level_vector(l, table),
        })
        .collect();

    let mut out = vec![false; n];
    let mut pos = 0usize;
    let mut started_at: Option<NaiveDateTime> = None;
    let mut dwell_from: Option<NaiveDateTime> = None;
    for k in 0..n {
        let now = times[k];
        let mut took_event = false;
        loop {
            let expired = pos > 0
                && matches!((within, started_at), (Some(w), Some(s)) if now - s > dur(w));
            if expired {
                pos = 0;
                started_at = None;
                dwell_from = None;
            }
            let done = match &steps[pos] {
                Step::Event(_) if vectors[pos][k] && !took_event => {
                    took_event = true;
                    true
                }
                Step::Event(_) => false,
                Step::Hold(_, d) if vectors[pos][k] => {
                    let from = *dwell_from.get_or_insert(now);
                    now - from >= dur(*d)
                }
                Step::Hold(..) => {
                    let restart = pos > 0;
                    pos = 0;
                    started_at = None;
                    dwell_from = None;
                    if restart {
                        continue;
                    }
                    false
                }
            };
            if !done {
                break;
            }
            if pos == 0 {
                started_at = Some(now);
            }
            pos += 1;
            dwell_from = None;
            if pos == steps.len() {
                out[k] = true;
                pos = 0;
                started_at = None;
                break;
            }
            if matches!(steps[pos], Step::Hold(..)) {
                dwell_from = Some(now);
            }
        }
    }
    out
}

/// Fire offsets of a program over a trace, with no recurrence policy.
pub fn brute_force_oracle(program: &Event, trace: &Trace, interval: u64) -> Vec<i64> {
    let table = Table::materialize(trace, interval);
    event_vector(program, &table)
        .into_iter()
        .zip(&table.offsets)
        .filter_map(|(fired, off)| fired.then_some(*off))
        .collect()
}

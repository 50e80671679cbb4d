//! One evaluation step of a trigger expression.
//!
//! Every stateful sub-event is stepped on every tick, even when an enclosing
//! operator would not need its value, so that edge detectors always see the
//! previous tick.

use chrono::{NaiveDateTime, NaiveTime};

use super::{BbValue, Blackboard, Tick};
use crate::dsl::{child_path, Event, Level, Step};

pub(crate) fn in_between(t: NaiveTime, from: NaiveTime, to: NaiveTime) -> bool {
    if from <= to {
        from <= t && t < to
    } else {
        t >= from || t < to
    }
}

pub(crate) fn level(l: &Level, tick: &Tick) -> bool {
    match l {
        Level::Sensor(id) => tick.snapshot.get(id).is_some_and(|v| v.as_bool()),
        Level::Compare {
            sensor,
            op,
            threshold,
        } => op.apply(
            tick.snapshot.get(sensor).map_or(0.0, |v| v.as_number()),
            *threshold,
        ),
        Level::Active(a) => tick.activity.current.as_deref() == Some(a.as_str()),
        Level::Between(from, to) => in_between(tick.now.time(), *from, *to),
        Level::Not(a) => !level(a, tick),
        Level::And(a, b) => level(a, tick) & level(b, tick),
        Level::Or(a, b) => level(a, tick) | level(b, tick),
    }
}

fn key(path: &str, field: &str) -> String {
    format!("{path}/{field}")
}

fn edge(bb: &mut Blackboard, path: &str, current: bool) -> (bool, bool) {
    let k = key(path, "prev");
    let prev = bb.get_bool(&k).unwrap_or(false);
    bb.set(k, BbValue::Bool(current));
    (prev, current)
}

pub(crate) fn event(e: &Event, path: &str, tick: &Tick, bb: &mut Blackboard) -> bool {
    let now = tick.now;
    match e {
        Event::At(t) => {
            let k = key(path, "fired_on");
            let done_today = bb.get_date(&k) == Some(now.date());
            if now.time() >= *t && !done_today {
                bb.set(k, BbValue::Date(now.date()));
                true
            } else {
                false
            }
        }
        Event::Rising(l) => {
            let (prev, cur) = edge(bb, path, level(l, tick));
            cur && !prev
        }
        Event::Falling(l) => {
            let (prev, cur) = edge(bb, path, level(l, tick));
            prev && !cur
        }
        Event::Started(a) => {
            let active = tick.activity.current.as_deref() == Some(a.as_str());
            let (prev, cur) = edge(bb, path, active);
            cur && !prev
        }
        Event::Ended(a) => {
            let active = tick.activity.current.as_deref() == Some(a.as_str());
            let (prev, cur) = edge(bb, path, active);
            prev && !cur
        }
        Event::Held(l, d) => {
            let (start_k, done_k) = (key(path, "since"), key(path, "done"));
            if !level(l, tick) {
                bb.remove(&start_k);
                bb.remove(&done_k);
                return false;
            }
            let since = match bb.get_time(&start_k) {
                Some(t) => t,
                None => {
                    bb.set(start_k, BbValue::Time(now));
                    now
                }
            };
            if bb.get_bool(&done_k) != Some(true) && now - since >= d.as_chrono() {
                bb.set(done_k, BbValue::Bool(true));
                true
            } else {
                false
            }
        }
        Event::After {
            event: inner,
            delay,
            cancel,
        } => {
            let inner_fired = event(inner, &child_path(path, 1), tick, bb);
            let k = key(path, "deadline");
            if cancel.as_ref().is_some_and(|c| level(c, tick)) {
                bb.remove(&k);
            }
            let mut fired = false;
            if let Some(deadline) = bb.get_time(&k) {
                if now >= deadline {
                    fired = true;
                    bb.remove(&k);
                }
            }
            if inner_fired {
                bb.set(k, BbValue::Time(now + delay.as_chrono()));
            }
            fired
        }
        Event::Seq { steps, within } => seq(steps, *within, path, tick, bb),
        Event::When(inner, gate) => {
            let fired = event(inner, &child_path(path, 1), tick, bb);
            fired && level(gate, tick)
        }
    }
}

struct SeqState {
    index: usize,
    first_done: Option<NaiveDateTime>,
    hold_since: Option<NaiveDateTime>,
}

impl SeqState {
    fn load(bb: &Blackboard, path: &str) -> Self {
        SeqState {
            index: bb.get_state(&key(path, "index")).unwrap_or(0) as usize,
            first_done: bb.get_time(&key(path, "first_done")),
            hold_since: bb.get_time(&key(path, "hold_since")),
        }
    }

    fn store(&self, bb: &mut Blackboard, path: &str) {
        bb.set(key(path, "index"), BbValue::State(self.index as u32));
        for (field, v) in [("first_done", self.first_done), ("hold_since", self.hold_since)] {
            match v {
                Some(t) => bb.set(key(path, field), BbValue::Time(t)),
                None => bb.remove(&key(path, field)),
            }
        }
    }

    fn reset(&mut self) {
        *self = SeqState {
            index: 0,
            first_done: None,
            hold_since: None,
        };
    }
}

fn seq(
    steps: &[Step],
    within: Option<crate::clock::Seconds>,
    path: &str,
    tick: &Tick,
    bb: &mut Blackboard,
) -> bool {
    let now = tick.now;
    let step_fired: Vec<bool> = steps
        .iter()
        .enumerate()
        .map(|(i, s)| match s {
            Step::Event(e) => event(e, &child_path(path, i + 1), tick, bb),
            Step::Hold(l, _) => level(l, tick),
        })
        .collect();

    let mut st = SeqState::load(bb, path);
    let mut event_used = false;
    let mut fired = false;
    loop {
        if st.index > 0 {
            if let (Some(w), Some(first)) = (within, st.first_done) {
                if now - first > w.as_chrono() {
                    st.reset();
                }
            }
        }
        let advance = match &steps[st.index] {
            Step::Event(_) => {
                if step_fired[st.index] && !event_used {
                    event_used = true;
                    true
                } else {
                    false
                }
            }
            Step::Hold(_, d) => {
                if !step_fired[st.index] {
                    if st.index == 0 {
                        st.hold_since = None;
                        false
                    } else {
                        st.reset();
                        continue;
                    }
                } else {
                    let since = *st.hold_since.get_or_insert(now);
                    now - since >= d.as_chrono()
                }
            }
        };
        if !advance {
            break;
        }
        if st.index == 0 {
            st.first_done = Some(now);
        }
        st.index += 1;
        st.hold_since = None;
        if st.index == steps.len() {
            fired = true;
            st.reset();
            break;
        }
        if let Step::Hold(..) = steps[st.index] {
            st.hold_since = Some(now);
        }
    }
    st.store(bb, path);
    fired
}

//! Tick-driven evaluation of reminders against the home state.

mod eval;

use std::collections::BTreeMap;

use chrono::{Datelike, NaiveDate, NaiveDateTime};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dsl::{self, TriggerKind, TypeError, ValidatedProgram};
use crate::home::{HomeConfig, SensorValue, ValueError};
use crate::intent::{Recurrence, ReminderIntent};

/// One scalar of evaluation state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BbValue {
    Bool(bool),
    Number(f64),
    Time(NaiveDateTime),
    Date(NaiveDate),
    State(u32),
}

/// Per-reminder evaluation state, keyed by `<node path>/<field>`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Blackboard(BTreeMap<String, BbValue>);

impl Blackboard {
    pub fn get(&self, key: &str) -> Option<&BbValue> {
        self.0.get(key)
    }

    pub fn set(&mut self, key: String, value: BbValue) {
        self.0.insert(key, value);
    }

    pub fn remove(&mut self, key: &str) {
        self.0.remove(key);
    }

    pub fn clear(&mut self) {
        self.0.clear();
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &BbValue)> {
        self.0.iter()
    }

    fn get_bool(&self, key: &str) -> Option<bool> {
        match self.0.get(key) {
            Some(BbValue::Bool(b)) => Some(*b),
            _ => None,
        }
    }

    fn get_time(&self, key: &str) -> Option<NaiveDateTime> {
        match self.0.get(key) {
            Some(BbValue::Time(t)) => Some(*t),
            _ => None,
        }
    }

    fn get_date(&self, key: &str) -> Option<NaiveDate> {
        match self.0.get(key) {
            Some(BbValue::Date(d)) => Some(*d),
            _ => None,
        }
    }

    fn get_state(&self, key: &str) -> Option<u32> {
        match self.0.get(key) {
            Some(BbValue::State(s)) => Some(*s),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActivityState {
    pub current: Option<String>,
    pub since: Option<NaiveDateTime>,
}

/// The home as seen at one instant. Sensors missing from the snapshot read
/// as their kind's default (closed, no motion, 0 A).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tick {
    pub now: NaiveDateTime,
    pub snapshot: BTreeMap<String, SensorValue>,
    pub activity: ActivityState,
}

impl Tick {
    pub fn at(now: NaiveDateTime) -> Self {
        Tick {
            now,
            snapshot: BTreeMap::new(),
            activity: ActivityState::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RuntimeError {
    #[error("tick at {now} is not after the previous tick at {previous}")]
    ClockRegression {
        previous: NaiveDateTime,
        now: NaiveDateTime,
    },
    #[error("unknown sensor `{0}`")]
    UnknownSensor(String),
    #[error("unknown activity `{0}`")]
    UnknownActivity(String),
    #[error(transparent)]
    InvalidValue(#[from] ValueError),
    #[error("trigger does not fit this home: {}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    Program(Vec<TypeError>),
    #[error("duplicate reminder id `{0}`")]
    DuplicateReminder(String),
}

/// Mutable evaluation state of a reminder, persisted across restarts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuntimeState {
    pub blackboard: Blackboard,
    pub armed: bool,
    pub fire_count: u64,
    pub last_fired: Option<NaiveDateTime>,
    pub last_tick: Option<NaiveDateTime>,
}

impl Default for RuntimeState {
    fn default() -> Self {
        RuntimeState {
            blackboard: Blackboard::default(),
            armed: true,
            fire_count: 0,
            last_fired: None,
            last_tick: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RuntimeReminder {
    pub id: String,
    pub intent: ReminderIntent,
    pub program: ValidatedProgram,
    pub kind: TriggerKind,
    pub state: RuntimeState,
}

impl RuntimeReminder {
    pub fn new(id: impl Into<String>, intent: ReminderIntent, program: ValidatedProgram) -> Self {
        let kind = dsl::classify(&program);
        RuntimeReminder {
            id: id.into(),
            intent,
            program,
            kind,
            state: RuntimeState::default(),
        }
    }

    /// Whether the recurrence and date policy admit a fire at `now`.
    pub fn admits(&self, now: NaiveDateTime) -> bool {
        if !self.state.armed {
            return false;
        }
        if let Some(date) = self.intent.resolved_date() {
            if now.date() != date {
                return false;
            }
        }
        let fired_today = self
            .state
            .last_fired
            .is_some_and(|t| t.date() == now.date());
        match self.intent.recurrence {
            Recurrence::Once => true,
            Recurrence::Daily => !fired_today,
            Recurrence::Weekly(day) => now.weekday() == day && !fired_today,
        }
    }

    /// Advances the trigger by one tick. Returns whether the reminder fires.
    pub fn evaluate_tick(&mut self, tick: &Tick) -> Result<bool, RuntimeError> {
        if let Some(previous) = self.state.last_tick {
            if tick.now <= previous {
                return Err(RuntimeError::ClockRegression {
                    previous,
                    now: tick.now,
                });
            }
        }
        self.state.last_tick = Some(tick.now);
        let raw = eval::event(&self.program.root, "0", tick, &mut self.state.blackboard);
        let fired = raw && self.admits(tick.now);
        if fired {
            self.state.fire_count += 1;
            self.state.last_fired = Some(tick.now);
            if self.intent.recurrence == Recurrence::Once {
                self.state.armed = false;
            }
        }
        Ok(fired)
    }

    /// Clears evaluation state; a fired one-off reminder stays disarmed.
    pub fn reset_state(&mut self) {
        self.state.blackboard.clear();
        self.state.armed = !(self.intent.recurrence == Recurrence::Once && self.state.fire_count > 0);
    }

    /// Whether this reminder can still fire at some point.
    pub fn is_active(&self) -> bool {
        self.state.armed
    }

    pub fn message(&self) -> String {
        format!("Reminder: {}", self.intent.what)
    }
}

/// Raw trigger evaluation without any recurrence policy; `true` whenever the
/// root event fires on this tick.
pub fn evaluate_program(program: &dsl::Event, tick: &Tick, bb: &mut Blackboard) -> bool {
    eval::event(program, "0", tick, bb)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Notification {
    pub reminder_id: String,
    pub message: String,
    pub fired_at: NaiveDateTime,
    pub trigger_kind: TriggerKind,
}

/// All reminders of one home plus the latest readings.
#[derive(Debug, Clone)]
pub struct Engine {
    home: HomeConfig,
    reminders: BTreeMap<String, RuntimeReminder>,
    snapshot: BTreeMap<String, SensorValue>,
    activity: ActivityState,
    last_tick: Option<NaiveDateTime>,
}

impl Engine {
    pub fn new(home: HomeConfig) -> Self {
        let snapshot = home
            .sensors
            .iter()
            .map(|s| (s.id.clone(), SensorValue::default_for(s.kind)))
            .collect();
        Engine {
            home,
            reminders: BTreeMap::new(),
            snapshot,
            activity: ActivityState::default(),
            last_tick: None,
        }
    }

    pub fn home(&self) -> &HomeConfig {
        &self.home
    }

    pub fn add(&mut self, reminder: RuntimeReminder) -> Result<(), RuntimeError> {
        dsl::typecheck(&reminder.program, &self.home).map_err(RuntimeError::Program)?;
        if self.reminders.contains_key(&reminder.id) {
            return Err(RuntimeError::DuplicateReminder(reminder.id));
        }
        self.reminders.insert(reminder.id.clone(), reminder);
        Ok(())
    }

    pub fn remove(&mut self, id: &str) -> Option<RuntimeReminder> {
        self.reminders.remove(id)
    }

    pub fn get(&self, id: &str) -> Option<&RuntimeReminder> {
        self.reminders.get(id)
    }

    pub fn reminders(&self) -> impl Iterator<Item = &RuntimeReminder> {
        self.reminders.values()
    }

    pub fn last_tick(&self) -> Option<NaiveDateTime> {
        self.last_tick
    }

    /// Applies sensor readings; all are validated before any is applied.
    pub fn ingest<'a>(
        &mut self,
        readings: impl IntoIterator<Item = (&'a str, SensorValue)>,
    ) -> Result<(), RuntimeError> {
        let mut checked = Vec::new();
        for (id, value) in readings {
            let sensor = self
                .home
                .resolve_sensor(id)
                .ok_or_else(|| RuntimeError::UnknownSensor(id.to_string()))?;
            value.validate(sensor)?;
            checked.push((id.to_string(), value));
        }
        self.snapshot.extend(checked);
        Ok(())
    }

    pub fn set_activity(
        &mut self,
        label: Option<&str>,
        at: NaiveDateTime,
    ) -> Result<(), RuntimeError> {
        if let Some(l) = label {
            if !self.home.has_activity(l) {
                return Err(RuntimeError::UnknownActivity(l.to_string()));
            }
        }
        if self.activity.current.as_deref() != label {
            self.activity = ActivityState {
                current: label.map(str::to_string),
                since: Some(at),
            };
        }
        Ok(())
    }

    pub fn activity(&self) -> &ActivityState {
        &self.activity
    }

    pub fn readings(&self) -> &BTreeMap<String, SensorValue> {
        &self.snapshot
    }

    /// The tick that `step(now)` would evaluate.
    pub fn snapshot_at(&self, now: NaiveDateTime) -> Tick {
        Tick {
            now,
            snapshot: self.snapshot.clone(),
            activity: self.activity.clone(),
        }
    }

    /// Evaluates every reminder against the current state at `now`.
    pub fn step(&mut self, now: NaiveDateTime) -> Result<Vec<Notification>, RuntimeError> {
        if let Some(previous) = self.last_tick {
            if now <= previous {
                return Err(RuntimeError::ClockRegression { previous, now });
            }
        }
        self.last_tick = Some(now);
        let tick = self.snapshot_at(now);
        let mut out = Vec::new();
        for r in self.reminders.values_mut() {
            if !r.state.armed {
                continue;
            }
            // reminders restored from disk may carry an older last_tick
            if r.state.last_tick.is_some_and(|t| t >= now) {
                continue;
            }
            if r.evaluate_tick(&tick)? {
                out.push(Notification {
                    reminder_id: r.id.clone(),
                    message: r.message(),
                    fired_at: now,
                    trigger_kind: r.kind,
                });
            }
        }
        Ok(out)
    }
}

/// Applies a tick's readings and activity to the engine, then steps it.
pub fn step_engine(engine: &mut Engine, tick: &Tick) -> Result<Vec<Notification>, RuntimeError> {
    engine.ingest(tick.snapshot.iter().map(|(k, v)| (k.as_str(), *v)))?;
    let since = tick.activity.since.unwrap_or(tick.now);
    engine.set_activity(tick.activity.current.as_deref(), since)?;
    engine.step(tick.now)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::intent::{normalize_intent, AuthoringContext, RawSlots, Slot};
    use chrono::{Duration, NaiveDate};

    fn t0() -> NaiveDateTime {
        NaiveDate::from_ymd_opt(2026, 10, 15)
            .unwrap()
            .and_hms_opt(8, 0, 0)
            .unwrap()
    }

    fn reminder(when: &str, recurrence: Option<&str>, dsl_text: &str) -> RuntimeReminder {
        let home = HomeConfig::sample_home();
        let mut raw = RawSlots::new();
        raw.insert(Slot::What, "test".into());
        raw.insert(Slot::When, when.into());
        if let Some(r) = recurrence {
            raw.insert(Slot::Recurrence, r.into());
        }
        let intent = normalize_intent(&raw, &home, &AuthoringContext::new(t0())).unwrap();
        let program = dsl::typecheck(&dsl::parse(dsl_text).unwrap(), &home).unwrap();
        RuntimeReminder::new("r1", intent, program)
    }

    fn run(engine: &mut Engine, secs: i64) -> Vec<NaiveDateTime> {
        let mut fired = Vec::new();
        for s in 0..secs {
            let now = t0() + Duration::seconds(s);
            fired.extend(engine.step(now).unwrap().into_iter().map(|n| n.fired_at));
        }
        fired
    }

    #[test]
    fn at_fires_once_per_day_and_once_reminders_disarm() {
        let mut e = Engine::new(HomeConfig::sample_home());
        let r = reminder("8:01", None, "at(08:01)");
        e.add(r).unwrap();
        let fired = run(&mut e, 180);
        assert_eq!(fired, vec![t0() + Duration::seconds(60)]);
        assert!(!e.get("r1").unwrap().state.armed);
    }

    #[test]
    fn rising_needs_a_false_to_true_transition() {
        let mut e = Engine::new(HomeConfig::sample_home());
        e.add(reminder(
            "when the front door opens",
            Some("daily"),
            "rising(sensor(contact_front_door))",
        ))
        .unwrap();
        e.ingest([("contact_front_door", SensorValue::Bool(true))]).unwrap();
        assert_eq!(e.step(t0()).unwrap().len(), 1);
        assert_eq!(e.step(t0() + Duration::seconds(1)).unwrap().len(), 0);
        e.ingest([("contact_front_door", SensorValue::Bool(false))]).unwrap();
        e.step(t0() + Duration::seconds(2)).unwrap();
        e.ingest([("contact_front_door", SensorValue::Bool(true))]).unwrap();
        // daily: already fired today
        assert_eq!(e.step(t0() + Duration::seconds(3)).unwrap().len(), 0);
        e.ingest([("contact_front_door", SensorValue::Bool(false))]).unwrap();
        e.step(t0() + Duration::days(1)).unwrap();
        e.ingest([("contact_front_door", SensorValue::Bool(true))]).unwrap();
        assert_eq!(e.step(t0() + Duration::days(1) + Duration::seconds(1)).unwrap().len(), 1);
    }

    #[test]
    fn microwave_sequence() {
        let mut e = Engine::new(HomeConfig::sample_home());
        e.add(reminder(
            "when I forget my food in the microwave",
            None,
            "seq(rising(sensor(plug_microwave) > 1.0), falling(sensor(plug_microwave) > 1.0), hold(not sensor(contact_microwave_door), 180s))",
        ))
        .unwrap();
        let at = |s| t0() + Duration::seconds(s);
        e.step(at(0)).unwrap();
        e.ingest([("plug_microwave", SensorValue::Amps(8.0))]).unwrap();
        e.step(at(1)).unwrap();
        e.ingest([("plug_microwave", SensorValue::Amps(0.0))]).unwrap();
        for s in 2..=61 {
            assert!(e.step(at(s)).unwrap().is_empty());
        }
        let mut fired = None;
        for s in 62..400 {
            if !e.step(at(s)).unwrap().is_empty() {
                fired = Some(s);
                break;
            }
        }
        // falling at t=2 enters the hold; the closed door must last 180s
        assert_eq!(fired, Some(182));
    }

    #[test]
    fn rejects_bad_input() {
        let mut e = Engine::new(HomeConfig::sample_home());
        assert!(matches!(
            e.ingest([("nope", SensorValue::Bool(true))]),
            Err(RuntimeError::UnknownSensor(_))
        ));
        assert!(matches!(
            e.ingest([("plug_microwave", SensorValue::Amps(-1.0))]),
            Err(RuntimeError::InvalidValue(_))
        ));
        assert!(matches!(
            e.set_activity(Some("jogging"), t0()),
            Err(RuntimeError::UnknownActivity(_))
        ));
        e.step(t0()).unwrap();
        assert!(matches!(
            e.step(t0()),
            Err(RuntimeError::ClockRegression { .. })
        ));
    }

    #[test]
    fn blackboard_serializes() {
        let mut bb = Blackboard::default();
        bb.set("0/prev".into(), BbValue::Bool(true));
        bb.set("0/index".into(), BbValue::State(2));
        let json = serde_json::to_string(&bb).unwrap();
        assert_eq!(json, r#"{"0/index":{"state":2},"0/prev":{"bool":true}}"#);
        assert_eq!(serde_json::from_str::<Blackboard>(&json).unwrap(), bb);
    }
}

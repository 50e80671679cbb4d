//! The engine thread. It owns the runtime engine, the reminder store and the
//! notification log; everything else talks to it through a command queue,
//! so there is exactly one writer.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::mpsc;
use std::thread::JoinHandle;
use std::time::{Duration as StdDuration, Instant};

use chrono::{Duration, Local, NaiveDateTime, SubsecRound};
use serde::{Deserialize, Serialize};
use tokio::sync::{broadcast, oneshot};

use remind_core::authoring::CompiledReminder;
use remind_core::dsl;
use remind_core::home::{HomeConfig, SensorKind, SensorValue};
use remind_core::runtime::{ActivityState, Engine, Notification, RuntimeError, RuntimeReminder};

use crate::error::{ApiError, ErrorCode};
use crate::store::{Status, Store, StoredReminder};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClockMode {
    Wall,
    /// Time moves only through [`EngineHandle::advance`].
    Virtual { start: NaiveDateTime },
}

#[derive(Debug, Clone)]
pub struct EngineConfig {
    pub home: HomeConfig,
    pub data: PathBuf,
    pub clock: ClockMode,
    /// Seconds between ticks.
    pub tick: u64,
    /// Ticks between blackboard checkpoints.
    pub checkpoint_every: u64,
}

impl EngineConfig {
    pub fn new(home: HomeConfig, data: impl Into<PathBuf>, clock: ClockMode) -> Self {
        EngineConfig {
            home,
            data: data.into(),
            clock,
            tick: 1,
            checkpoint_every: 300,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EventKind {
    Sensor,
    Activity,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventIn {
    pub kind: EventKind,
    pub target: String,
    #[serde(default)]
    pub value: Option<serde_json::Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdvanceReport {
    pub now: NaiveDateTime,
    pub ticks: u64,
    pub fired: Vec<Notification>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateView {
    pub now: NaiveDateTime,
    pub clock: String,
    pub tick_seconds: u64,
    pub snapshot: BTreeMap<String, SensorValue>,
    pub activity: ActivityState,
    pub armed_reminders: usize,
    pub notifications: usize,
}

type Reply<T> = oneshot::Sender<T>;

enum Command {
    Add(Box<CompiledReminder>, Reply<Result<StoredReminder, ApiError>>),
    List(Reply<Vec<StoredReminder>>),
    Delete(String, Reply<Result<(), ApiError>>),
    Event(EventIn, Reply<Result<NaiveDateTime, ApiError>>),
    Advance(u64, Reply<Result<AdvanceReport, ApiError>>),
    Now(Reply<NaiveDateTime>),
    State(Reply<StateView>),
    Notifications(usize, Reply<Vec<Notification>>),
    Checkpoint(Reply<Result<(), ApiError>>),
    Shutdown(Reply<Result<(), ApiError>>),
}

#[derive(Debug, thiserror::Error)]
pub enum StartError {
    #[error("storage: {0}")]
    Io(#[from] std::io::Error),
    #[error("stored reminder {id}: {reason}")]
    BadReminder { id: String, reason: String },
    #[error(transparent)]
    Runtime(#[from] RuntimeError),
}

/// Cloneable handle to the engine thread.
#[derive(Clone)]
pub struct EngineHandle {
    tx: mpsc::Sender<Command>,
    notifications: broadcast::Sender<Notification>,
    virtual_clock: bool,
}

fn gone() -> ApiError {
    ApiError::new(ErrorCode::Internal, "engine stopped")
}

impl EngineHandle {
    async fn call<T>(&self, make: impl FnOnce(Reply<T>) -> Command) -> Result<T, ApiError> {
        let (tx, rx) = oneshot::channel();
        self.tx.send(make(tx)).map_err(|_| gone())?;
        rx.await.map_err(|_| gone())
    }

    fn call_blocking<T>(&self, make: impl FnOnce(Reply<T>) -> Command) -> Result<T, ApiError> {
        let (tx, rx) = oneshot::channel();
        self.tx.send(make(tx)).map_err(|_| gone())?;
        rx.blocking_recv().map_err(|_| gone())
    }

    pub fn is_virtual(&self) -> bool {
        self.virtual_clock
    }

    pub fn subscribe(&self) -> broadcast::Receiver<Notification> {
        self.notifications.subscribe()
    }

    pub async fn add(&self, c: CompiledReminder) -> Result<StoredReminder, ApiError> {
        self.call(|r| Command::Add(Box::new(c), r)).await?
    }

    pub async fn list(&self) -> Result<Vec<StoredReminder>, ApiError> {
        self.call(Command::List).await
    }

    pub async fn delete(&self, id: String) -> Result<(), ApiError> {
        self.call(|r| Command::Delete(id, r)).await?
    }

    pub async fn event(&self, e: EventIn) -> Result<NaiveDateTime, ApiError> {
        self.call(|r| Command::Event(e, r)).await?
    }

    pub async fn advance(&self, seconds: u64) -> Result<AdvanceReport, ApiError> {
        self.call(|r| Command::Advance(seconds, r)).await?
    }

    pub async fn now(&self) -> Result<NaiveDateTime, ApiError> {
        self.call(Command::Now).await
    }

    pub async fn state(&self) -> Result<StateView, ApiError> {
        self.call(Command::State).await
    }

    pub async fn notifications(&self, since: usize) -> Result<Vec<Notification>, ApiError> {
        self.call(|r| Command::Notifications(since, r)).await
    }

    pub async fn checkpoint(&self) -> Result<(), ApiError> {
        self.call(Command::Checkpoint).await?
    }

    pub async fn shutdown(&self) -> Result<(), ApiError> {
        self.call(Command::Shutdown).await?
    }

    /// For callers outside any async runtime.
    pub fn shutdown_blocking(&self) -> Result<(), ApiError> {
        self.call_blocking(Command::Shutdown)?
    }
}

struct Core {
    engine: Engine,
    store: Store,
    reminders: BTreeMap<String, StoredReminder>,
    log: Vec<Notification>,
    clock: ClockMode,
    now: NaiveDateTime,
    tick: u64,
    checkpoint_every: u64,
    since_checkpoint: u64,
    broadcast: broadcast::Sender<Notification>,
}

fn wall_now() -> NaiveDateTime {
    Local::now().naive_local().trunc_subsecs(0)
}

fn runtime_of(stored: &StoredReminder, home: &HomeConfig) -> Result<RuntimeReminder, StartError> {
    let bad = |reason: String| StartError::BadReminder {
        id: stored.id.clone(),
        reason,
    };
    let program = dsl::parse(&stored.dsl).map_err(|e| bad(e.to_string()))?;
    let program = dsl::typecheck(&program, home).map_err(|errs| {
        bad(errs.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))
    })?;
    Ok(RuntimeReminder::new(
        stored.id.clone(),
        stored.intent.clone(),
        program,
    ))
}

fn value_for(kind: SensorKind, raw: Option<&serde_json::Value>) -> Option<SensorValue> {
    match (kind.is_boolean(), raw?) {
        (true, serde_json::Value::Bool(b)) => Some(SensorValue::Bool(*b)),
        (false, serde_json::Value::Number(n)) => n.as_f64().map(SensorValue::Amps),
        _ => None,
    }
}

impl Core {
    fn open(cfg: &EngineConfig, broadcast: broadcast::Sender<Notification>) -> Result<Core, StartError> {
        let store = Store::open(&cfg.data)?;
        let mut engine = Engine::new(cfg.home.clone());
        let mut reminders = BTreeMap::new();
        for stored in store.load_reminders()? {
            if stored.status != Status::Deleted {
                let mut r = runtime_of(&stored, &cfg.home)?;
                if stored.status == Status::Armed {
                    if let Some(state) = store.load_state(&stored.id)? {
                        r.state = state;
                    }
                    engine.add(r)?;
                }
            }
            reminders.insert(stored.id.clone(), stored);
        }
        let now = match cfg.clock {
            ClockMode::Wall => wall_now(),
            ClockMode::Virtual { start } => store.load_clock()?.map_or(start, |saved| saved.max(start)),
        };
        Ok(Core {
            engine,
            log: store.load_notifications()?,
            store,
            reminders,
            clock: cfg.clock,
            now,
            tick: cfg.tick.max(1),
            checkpoint_every: cfg.checkpoint_every.max(1),
            since_checkpoint: 0,
            broadcast,
        })
    }

    fn step(&mut self) -> Result<Vec<Notification>, ApiError> {
        if self.engine.last_tick().is_some_and(|t| t >= self.now) {
            return Ok(Vec::new());
        }
        let fired = self.engine.step(self.now).map_err(ApiError::internal)?;
        for n in &fired {
            self.store.append_notification(n).map_err(ApiError::internal)?;
            self.log.push(n.clone());
            let _ = self.broadcast.send(n.clone());
            let spent = self.engine.get(&n.reminder_id).is_some_and(|r| !r.state.armed);
            if spent {
                if let Some(stored) = self.reminders.get_mut(&n.reminder_id) {
                    stored.status = Status::Disarmed;
                    self.store.save_reminder(stored).map_err(ApiError::internal)?;
                }
                if let Some(r) = self.engine.get(&n.reminder_id) {
                    self.store
                        .save_state(&r.id, &r.state)
                        .map_err(ApiError::internal)?;
                }
            }
        }
        self.since_checkpoint += 1;
        if self.since_checkpoint >= self.checkpoint_every {
            self.checkpoint()?;
        }
        Ok(fired)
    }

    fn checkpoint(&mut self) -> Result<(), ApiError> {
        for r in self.engine.reminders() {
            self.store.save_state(&r.id, &r.state).map_err(ApiError::internal)?;
        }
        if let ClockMode::Virtual { .. } = self.clock {
            self.store.save_clock(self.now).map_err(ApiError::internal)?;
        }
        self.since_checkpoint = 0;
        Ok(())
    }

    fn current_time(&mut self) -> NaiveDateTime {
        if self.clock == ClockMode::Wall {
            self.now = self.now.max(wall_now());
        }
        self.now
    }

    fn add(&mut self, c: CompiledReminder) -> Result<StoredReminder, ApiError> {
        let stored = StoredReminder::from_compiled(&c);
        self.store.save_reminder(&stored).map_err(ApiError::internal)?;
        let r = RuntimeReminder::new(stored.id.clone(), c.intent, c.program);
        self.engine.add(r).map_err(ApiError::internal)?;
        self.reminders.insert(stored.id.clone(), stored.clone());
        Ok(stored)
    }

    fn delete(&mut self, id: &str) -> Result<(), ApiError> {
        let stored = self
            .reminders
            .get_mut(id)
            .ok_or_else(|| ApiError::new(ErrorCode::NotFound, format!("no reminder {id}")))?;
        if stored.status != Status::Deleted {
            stored.status = Status::Deleted;
            self.store.save_reminder(stored).map_err(ApiError::internal)?;
            self.engine.remove(id);
        }
        Ok(())
    }

    fn event(&mut self, e: EventIn) -> Result<NaiveDateTime, ApiError> {
        let at = self.current_time();
        match e.kind {
            EventKind::Sensor => {
                let sensor = self.engine.home().resolve_sensor(&e.target).ok_or_else(|| {
                    ApiError::new(ErrorCode::UnknownSensor, format!("no sensor {}", e.target))
                })?;
                let value = value_for(sensor.kind, e.value.as_ref()).ok_or_else(|| {
                    ApiError::new(
                        ErrorCode::InvalidValue,
                        format!(
                            "{} is a {} sensor; expected a {}",
                            e.target,
                            sensor.kind.as_str(),
                            if sensor.kind.is_boolean() { "boolean" } else { "number of amperes" }
                        ),
                    )
                })?;
                self.engine
                    .ingest([(e.target.as_str(), value)])
                    .map_err(|err| ApiError::new(ErrorCode::InvalidValue, err.to_string()))?;
            }
            EventKind::Activity => {
                let label = (e.target != "none").then_some(e.target.as_str());
                self.engine.set_activity(label, at).map_err(|err| {
                    ApiError::new(ErrorCode::UnknownActivity, err.to_string())
                })?;
            }
        }
        Ok(at)
    }

    fn advance(&mut self, seconds: u64) -> Result<AdvanceReport, ApiError> {
        if self.clock == ClockMode::Wall {
            return Err(ApiError::new(
                ErrorCode::WrongClockMode,
                "ticks can only be injected with --clock virtual",
            ));
        }
        if seconds == 0 || !seconds.is_multiple_of(self.tick) {
            return Err(ApiError::new(
                ErrorCode::InvalidValue,
                format!("seconds must be a positive multiple of the {} s tick", self.tick),
            ));
        }
        let ticks = seconds / self.tick;
        let mut fired = Vec::new();
        for _ in 0..ticks {
            self.now += Duration::seconds(self.tick as i64);
            fired.extend(self.step()?);
        }
        Ok(AdvanceReport {
            now: self.now,
            ticks,
            fired,
        })
    }

    fn state(&mut self) -> StateView {
        StateView {
            now: self.current_time(),
            clock: match self.clock {
                ClockMode::Wall => "wall".into(),
                ClockMode::Virtual { .. } => "virtual".into(),
            },
            tick_seconds: self.tick,
            snapshot: self.engine.readings().clone(),
            activity: self.engine.activity().clone(),
            armed_reminders: self.engine.reminders().filter(|r| r.state.armed).count(),
            notifications: self.log.len(),
        }
    }

    /// Returns false when the loop should stop.
    fn handle(&mut self, cmd: Command) -> bool {
        match cmd {
            Command::Add(c, r) => {
                let _ = r.send(self.add(*c));
            }
            Command::List(r) => {
                let list = self
                    .reminders
                    .values()
                    .filter(|s| s.status != Status::Deleted)
                    .cloned()
                    .collect();
                let _ = r.send(list);
            }
            Command::Delete(id, r) => {
                let _ = r.send(self.delete(&id));
            }
            Command::Event(e, r) => {
                let _ = r.send(self.event(e));
            }
            Command::Advance(s, r) => {
                let _ = r.send(self.advance(s));
            }
            Command::Now(r) => {
                let _ = r.send(self.current_time());
            }
            Command::State(r) => {
                let _ = r.send(self.state());
            }
            Command::Notifications(since, r) => {
                let _ = r.send(self.log.get(since..).unwrap_or_default().to_vec());
            }
            Command::Checkpoint(r) => {
                let _ = r.send(self.checkpoint());
            }
            Command::Shutdown(r) => {
                let _ = r.send(self.checkpoint());
                return false;
            }
        }
        true
    }

    fn run(mut self, rx: mpsc::Receiver<Command>) {
        let period = StdDuration::from_secs(self.tick);
        let mut next = Instant::now() + period;
        loop {
            let cmd = match self.clock {
                ClockMode::Virtual { .. } => match rx.recv() {
                    Ok(c) => c,
                    Err(_) => break,
                },
                ClockMode::Wall => {
                    match rx.recv_timeout(next.saturating_duration_since(Instant::now())) {
                        Ok(c) => c,
                        Err(mpsc::RecvTimeoutError::Timeout) => {
                            next += period;
                            self.now = self.now.max(wall_now());
                            if let Err(e) = self.step() {
                                eprintln!("tick failed: {e}");
                            }
                            continue;
                        }
                        Err(mpsc::RecvTimeoutError::Disconnected) => break,
                    }
                }
            };
            if !self.handle(cmd) {
                return;
            }
        }
        let _ = self.checkpoint();
    }
}

/// Loads the store and starts the engine thread.
pub fn start(cfg: &EngineConfig) -> Result<(EngineHandle, JoinHandle<()>), StartError> {
    let (btx, _) = broadcast::channel(1024);
    let core = Core::open(cfg, btx.clone())?;
    let (tx, rx) = mpsc::channel();
    let join = std::thread::Builder::new()
        .name("remind-engine".into())
        .spawn(move || core.run(rx))?;
    Ok((
        EngineHandle {
            tx,
            notifications: btx,
            virtual_clock: matches!(cfg.clock, ClockMode::Virtual { .. }),
        },
        join,
    ))
}


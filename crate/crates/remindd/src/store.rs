//! On-disk layout under the data directory:
//!
//! ```text
//! reminders/<id>.json     one StoredReminder each
//! state/<id>.json         runtime state (blackboard, arming) at the last checkpoint
//! notifications.jsonl     append-only notification log
//! clock.json              virtual clock position at the last checkpoint
//! ```

use std::fs::{self, File, OpenOptions};
use std::io::{self, BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use chrono::NaiveDateTime;
use serde::{Deserialize, Serialize};

use remind_core::authoring::CompiledReminder;
use remind_core::dsl::TriggerKind;
use remind_core::intent::ReminderIntent;
use remind_core::runtime::{Notification, RuntimeState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Armed,
    Disarmed,
    Deleted,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoredReminder {
    pub id: String,
    pub intent: ReminderIntent,
    pub dsl: String,
    pub kind: TriggerKind,
    pub created_at: NaiveDateTime,
    pub status: Status,
}

impl StoredReminder {
    /// A freshly armed record with a new time-sortable id.
    pub fn from_compiled(c: &CompiledReminder) -> StoredReminder {
        StoredReminder {
            id: uuid::Uuid::now_v7().simple().to_string(),
            intent: c.intent.clone(),
            dsl: c.dsl(),
            kind: c.kind,
            created_at: c.intent.created_at,
            status: Status::Armed,
        }
    }
}

#[derive(Debug)]
pub struct Store {
    root: PathBuf,
}

fn write_atomic(path: &Path, bytes: &[u8]) -> io::Result<()> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, bytes)?;
    fs::rename(tmp, path)
}

fn to_json<T: Serialize>(v: &T) -> io::Result<Vec<u8>> {
    serde_json::to_vec_pretty(v).map_err(io::Error::other)
}

impl Store {
    pub fn open(root: impl Into<PathBuf>) -> io::Result<Store> {
        let root = root.into();
        fs::create_dir_all(root.join("reminders"))?;
        fs::create_dir_all(root.join("state"))?;
        Ok(Store { root })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn reminder_path(&self, id: &str) -> PathBuf {
        self.root.join("reminders").join(format!("{id}.json"))
    }

    fn state_path(&self, id: &str) -> PathBuf {
        self.root.join("state").join(format!("{id}.json"))
    }

    pub fn log_path(&self) -> PathBuf {
        self.root.join("notifications.jsonl")
    }

    pub fn save_reminder(&self, r: &StoredReminder) -> io::Result<()> {
        write_atomic(&self.reminder_path(&r.id), &to_json(r)?)
    }

    /// Every stored reminder, deleted ones included, in id order.
    pub fn load_reminders(&self) -> io::Result<Vec<StoredReminder>> {
        load_reminder_dir(&self.root.join("reminders"))
    }

    pub fn save_state(&self, id: &str, state: &RuntimeState) -> io::Result<()> {
        write_atomic(&self.state_path(id), &to_json(state)?)
    }

    pub fn load_state(&self, id: &str) -> io::Result<Option<RuntimeState>> {
        match fs::read(self.state_path(id)) {
            Ok(bytes) => serde_json::from_slice(&bytes)
                .map(Some)
                .map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e)),
            Err(e) if e.kind() == io::ErrorKind::NotFound => Ok(None),
            Err(e) => Err(e),
        }
    }

    pub fn append_notification(&self, n: &Notification) -> io::Result<()> {
        let mut f = OpenOptions::new()
            .create(true)
            .append(true)
            .open(self.log_path())?;
        let mut line = serde_json::to_vec(n).map_err(io::Error::other)?;
        line.push(b'\n');
        f.write_all(&line)?;
        f.sync_data()
    }

    pub fn load_notifications(&self) -> io::Result<Vec<Notification>> {
        let f = match File::open(self.log_path()) {
            Ok(f) => f,
            Err(e) if e.kind() == io::ErrorKind::NotFound => return Ok(Vec::new()),
            Err(e) => return Err(e),
        };
        let mut out = Vec::new();
        for line in BufReader::new(f).lines() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            out.push(
                serde_json::from_str(&line)
                    .map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e))?,
            );
        }
        Ok(out)
    }

    pub fn save_clock(&self, now: NaiveDateTime) -> io::Result<()> {
        write_atomic(&self.root.join("clock.json"), &to_json(&now)?)
    }

    pub fn load_clock(&self) -> io::Result<Option<NaiveDateTime>> {
        match fs::read(self.root.join("clock.json")) {
            Ok(bytes) => serde_json::from_slice(&bytes)
                .map(Some)
                .map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e)),
            Err(e) if e.kind() == io::ErrorKind::NotFound => Ok(None),
            Err(e) => Err(e),
        }
    }
}

/// Reads every `*.json` reminder document in `dir`, sorted by id.
pub fn load_reminder_dir(dir: &Path) -> io::Result<Vec<StoredReminder>> {
    let mut out = Vec::new();
    for entry in fs::read_dir(dir)? {
        let path = entry?.path();
        if path.extension().is_some_and(|e| e == "json") {
            let r: StoredReminder = serde_json::from_slice(&fs::read(&path)?).map_err(|e| {
                io::Error::new(io::ErrorKind::InvalidData, format!("{}: {e}", path.display()))
            })?;
            out.push(r);
        }
    }
    out.sort_by(|a, b| a.id.cmp(&b.id));
    Ok(out)
}

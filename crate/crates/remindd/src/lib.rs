//! Reminder service: HTTP API, engine thread, storage and CLI commands.

pub mod api;
pub mod commands;
pub mod engine;
pub mod error;
pub mod llm;
pub mod store;

pub use api::{router, AppState, BackendFactory};
pub use engine::{start, ClockMode, EngineConfig, EngineHandle};
pub use error::{ApiError, ErrorCode};
pub use store::{Status, Store, StoredReminder};

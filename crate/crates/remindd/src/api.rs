use std::collections::HashMap;
use std::convert::Infallible;
use std::sync::{Arc, Mutex};

use axum::body::Bytes;
use axum::extract::{Path, RawQuery, State};
use axum::response::sse::{Event, KeepAlive, Sse};
use axum::routing::{delete, get, post};
use axum::{Json, Router};
use futures::Stream;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use tokio::sync::broadcast::error::RecvError;

use remind_core::authoring::{handle_user_message, AssistantBackend, AuthoringError, Session, Stage};
use remind_core::home::HomeConfig;
use remind_core::intent::{AuthoringContext, RawSlots};
use remind_core::runtime::Notification;

use crate::engine::{AdvanceReport, EngineHandle, EventIn, StateView};
use crate::error::{ApiError, ErrorCode};
use crate::store::StoredReminder;

pub type BackendFactory = Arc<dyn Fn() -> Box<dyn AssistantBackend + Send> + Send + Sync>;

type SessionSlot = Arc<tokio::sync::Mutex<Session>>;

#[derive(Clone)]
pub struct AppState {
    pub engine: EngineHandle,
    pub home: Arc<HomeConfig>,
    pub backend: BackendFactory,
    sessions: Arc<Mutex<HashMap<String, SessionSlot>>>,
}

impl AppState {
    pub fn new(engine: EngineHandle, home: HomeConfig, backend: BackendFactory) -> Self {
        AppState {
            engine,
            home: Arc::new(home),
            backend,
            sessions: Arc::default(),
        }
    }

    fn session(&self, id: &str) -> Result<SessionSlot, ApiError> {
        self.sessions
            .lock()
            .expect("session map")
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError::new(ErrorCode::NotFound, format!("no session {id}")))
    }
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/sessions", post(create_session))
        .route("/sessions/{id}", get(get_session))
        .route("/sessions/{id}/messages", post(post_message))
        .route("/reminders", get(list_reminders))
        .route("/reminders/{id}", delete(delete_reminder))
        .route("/events", post(post_event))
        .route("/notifications", get(list_notifications))
        .route("/notifications/stream", get(stream_notifications))
        .route("/ticks", post(post_ticks))
        .route("/state", get(get_state))
        .fallback(|| async { ApiError::new(ErrorCode::NotFound, "no such route") })
        .with_state(state)
}

fn body<T: DeserializeOwned>(bytes: &Bytes) -> Result<T, ApiError> {
    serde_json::from_slice(bytes).map_err(|e| ApiError::new(ErrorCode::InvalidBody, e.to_string()))
}

#[derive(Serialize)]
struct SessionCreated {
    session_id: String,
    stage: Stage,
}

async fn create_session(State(st): State<AppState>) -> Json<SessionCreated> {
    let id = uuid::Uuid::now_v7().simple().to_string();
    let session = Session::new(id.clone());
    st.sessions
        .lock()
        .expect("session map")
        .insert(id.clone(), Arc::new(tokio::sync::Mutex::new(session)));
    Json(SessionCreated {
        session_id: id,
        stage: Stage::Ask,
    })
}

async fn get_session(State(st): State<AppState>, Path(id): Path<String>) -> Result<Json<Session>, ApiError> {
    let slot = st.session(&id)?;
    let s = slot.lock().await.clone();
    Ok(Json(s))
}

#[derive(Deserialize)]
struct MessageIn {
    text: String,
}

#[derive(Serialize, Deserialize, Debug)]
pub struct MessageOut {
    pub reply: String,
    pub stage: Stage,
    pub slots: RawSlots,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reminder_id: Option<String>,
}

async fn post_message(
    State(st): State<AppState>,
    Path(id): Path<String>,
    raw: Bytes,
) -> Result<Json<MessageOut>, ApiError> {
    let msg: MessageIn = body(&raw)?;
    if msg.text.trim().is_empty() {
        return Err(ApiError::new(ErrorCode::EmptyText, "text is empty"));
    }
    let slot = st.session(&id)?;
    let mut guard = slot
        .try_lock()
        .map_err(|_| ApiError::new(ErrorCode::SessionBusy, "a message for this session is in progress"))?;
    if guard.stage.is_closed() {
        return Err(closed(&guard));
    }
    let ctx = AuthoringContext::new(st.engine.now().await?);
    let mut session = guard.clone();
    let home = st.home.clone();
    let factory = st.backend.clone();
    let (session, result) = tokio::task::spawn_blocking(move || {
        let mut backend = factory();
        let r = handle_user_message(&mut session, &msg.text, &home, &ctx, backend.as_mut());
        (session, r)
    })
    .await
    .map_err(ApiError::internal)?;
    let reply = match result {
        Ok(reply) => reply,
        Err(AuthoringError::SessionClosed) => return Err(closed(&session)),
        Err(e) => return Err(ApiError::internal(e)),
    };
    let mut reminder_id = None;
    if session.stage == Stage::Done {
        if let Some(c) = session.emitted.clone() {
            reminder_id = Some(st.engine.add(c).await?.id);
        }
    }
    *guard = session;
    Ok(Json(MessageOut {
        reply,
        stage: guard.stage,
        slots: guard.slots.clone(),
        reminder_id,
    }))
}

fn closed(s: &Session) -> ApiError {
    ApiError::new(
        ErrorCode::SessionClosed,
        format!("session is {}", s.stage.as_str()),
    )
}

async fn list_reminders(State(st): State<AppState>) -> Result<Json<Vec<StoredReminder>>, ApiError> {
    Ok(Json(st.engine.list().await?))
}

async fn delete_reminder(State(st): State<AppState>, Path(id): Path<String>) -> Result<Json<Value>, ApiError> {
    st.engine.delete(id).await?;
    Ok(Json(json!({"status": "deleted"})))
}

async fn post_event(State(st): State<AppState>, raw: Bytes) -> Result<Json<Value>, ApiError> {
    let e: EventIn = body(&raw)?;
    let at = st.engine.event(e).await?;
    Ok(Json(json!({"accepted_at": at})))
}

/// `since` is the number of log records already seen; omitted means 0.
fn since_param(q: Option<String>) -> Result<usize, ApiError> {
    let Some(q) = q else { return Ok(0) };
    for pair in q.split('&') {
        let (k, v) = pair.split_once('=').unwrap_or((pair, ""));
        if k == "since" {
            return v.parse().map_err(|_| {
                ApiError::new(ErrorCode::InvalidQuery, format!("since must be a count, got {v:?}"))
            });
        }
    }
    Ok(0)
}

async fn list_notifications(
    State(st): State<AppState>,
    RawQuery(q): RawQuery,
) -> Result<Json<Vec<Notification>>, ApiError> {
    let since = since_param(q)?;
    Ok(Json(st.engine.notifications(since).await?))
}

async fn stream_notifications(
    State(st): State<AppState>,
) -> Sse<impl Stream<Item = Result<Event, Infallible>>> {
    let rx = st.engine.subscribe();
    let stream = futures::stream::unfold(rx, |mut rx| async move {
        loop {
            match rx.recv().await {
                Ok(n) => {
                    let ev = Event::default()
                        .event("notification")
                        .json_data(&n)
                        .unwrap_or_else(|_| Event::default().comment("unserializable"));
                    return Some((Ok(ev), rx));
                }
                Err(RecvError::Lagged(_)) => continue,
                Err(RecvError::Closed) => return None,
            }
        }
    });
    Sse::new(stream).keep_alive(KeepAlive::default())
}

#[derive(Deserialize)]
struct TicksIn {
    seconds: u64,
}

async fn post_ticks(State(st): State<AppState>, raw: Bytes) -> Result<Json<AdvanceReport>, ApiError> {
    let t: TicksIn = body(&raw)?;
    Ok(Json(st.engine.advance(t.seconds).await?))
}

async fn get_state(State(st): State<AppState>) -> Result<Json<StateView>, ApiError> {
    Ok(Json(st.engine.state().await?))
}

//! In-process service over a temporary data directory with a virtual clock.
#![allow(dead_code)]

use std::path::Path;
use std::thread::JoinHandle;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use chrono::{NaiveDate, NaiveDateTime};
use http_body_util::BodyExt;
use serde_json::Value;
use tower::ServiceExt;

use remind_core::home::HomeConfig;
use remindd::commands::backend_factory;
use remindd::{router, AppState, BackendFactory, ClockMode, EngineConfig, EngineHandle};

pub fn t0() -> NaiveDateTime {
    NaiveDate::from_ymd_opt(2026, 10, 15)
        .unwrap()
        .and_hms_opt(9, 0, 0)
        .unwrap()
}

pub struct App {
    pub engine: EngineHandle,
    pub router: Router,
    join: Option<JoinHandle<()>>,
}

impl App {
    pub fn open(data: &Path) -> App {
        let home = HomeConfig::sample_home();
        App::with_backend(data, backend_factory(&home))
    }

    pub fn with_backend(data: &Path, backend: BackendFactory) -> App {
        let home = HomeConfig::sample_home();
        let cfg = EngineConfig::new(home.clone(), data, ClockMode::Virtual { start: t0() });
        let (engine, join) = remindd::start(&cfg).unwrap();
        let router = router(AppState::new(engine.clone(), home, backend));
        App {
            engine,
            router,
            join: Some(join),
        }
    }

    pub async fn call(&self, method: &str, path: &str, body: Option<&str>) -> (StatusCode, Value) {
        let req = Request::builder()
            .method(method)
            .uri(path)
            .header("content-type", "application/json")
            .body(body.map_or_else(Body::empty, |b| Body::from(b.to_string())))
            .unwrap();
        let resp = self.router.clone().oneshot(req).await.unwrap();
        let status = resp.status();
        let bytes = resp.into_body().collect().await.unwrap().to_bytes();
        let v = if bytes.is_empty() {
            Value::Null
        } else {
            serde_json::from_slice(&bytes).unwrap_or_else(|_| Value::String(String::from_utf8_lossy(&bytes).into()))
        };
        (status, v)
    }

    pub async fn ok(&self, method: &str, path: &str, body: Option<&str>) -> Value {
        let (s, v) = self.call(method, path, body).await;
        assert!(s.is_success(), "{method} {path}: {s} {v}");
        v
    }

    /// Opens a session and sends each message; returns the last response.
    pub async fn author(&self, messages: &[&str]) -> Value {
        let sid = self.ok("POST", "/sessions", None).await["session_id"].as_str().unwrap().to_string();
        let mut last = Value::Null;
        for m in messages {
            let body = serde_json::json!({ "text": m }).to_string();
            last = self.ok("POST", &format!("/sessions/{sid}/messages"), Some(&body)).await;
        }
        last
    }

    pub async fn shutdown(mut self) {
        self.engine.shutdown().await.unwrap();
        if let Some(j) = self.join.take() {
            j.join().unwrap();
        }
    }
}

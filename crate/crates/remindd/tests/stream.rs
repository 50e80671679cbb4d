mod common;

use std::time::Duration;

use rand::{Rng, SeedableRng};
use serde_json::{json, Value};

use remind_core::home::HomeConfig;
use remindd::commands::backend_factory;
use remindd::{router, AppState, ClockMode, EngineConfig};

/// Reads SSE frames until `n` notification events have arrived.
async fn collect(mut resp: reqwest::Response, n: usize) -> Vec<Value> {
    let mut buf = String::new();
    let mut out = Vec::new();
    while out.len() < n {
        let chunk = tokio::time::timeout(Duration::from_secs(5), resp.chunk())
            .await
            .expect("stream stalled")
            .unwrap()
            .expect("stream ended");
        buf.push_str(std::str::from_utf8(&chunk).unwrap());
        while let Some(end) = buf.find("\n\n") {
            let frame: String = buf.drain(..end + 2).collect();
            if frame.lines().any(|l| l == "event: notification") {
                let data = frame.lines().find_map(|l| l.strip_prefix("data: ")).unwrap();
                out.push(serde_json::from_str(data).unwrap());
            }
        }
    }
    out
}

#[tokio::test(flavor = "multi_thread")]
async fn two_subscribers_each_see_every_notification_once() {
    let dir = tempfile::tempdir().unwrap();
    let home = HomeConfig::sample_home();
    let cfg = EngineConfig::new(home.clone(), dir.path(), ClockMode::Virtual { start: common::t0() });
    let (engine, join) = remindd::start(&cfg).unwrap();
    let app = router(AppState::new(engine.clone(), home.clone(), backend_factory(&home)));
    let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
    let base = format!("http://{}", listener.local_addr().unwrap());
    let server = tokio::spawn(async move { axum::serve(listener, app).await.unwrap() });

    let http = reqwest::Client::new();
    let post = |path: &str, body: Value| {
        let req = http
            .post(format!("{base}{path}"))
            .header("content-type", "application/json")
            .body(body.to_string());
        async move {
            let r = req.send().await.unwrap();
            assert!(r.status().is_success(), "{}", r.status());
            serde_json::from_str::<Value>(&r.text().await.unwrap()).unwrap()
        }
    };
    let sid = post("/sessions", json!({})).await["session_id"].as_str().unwrap().to_string();
    let msgs = format!("/sessions/{sid}/messages");
    post(&msgs, json!({"text": "remind me to close the door when the front door opens"})).await;
    assert_eq!(post(&msgs, json!({"text": "yes"})).await["stage"], "done");

    let a = http.get(format!("{base}/notifications/stream")).send().await.unwrap();
    let b = http.get(format!("{base}/notifications/stream")).send().await.unwrap();
    assert_eq!(a.headers()["content-type"], "text/event-stream");
    let (ta, tb) = (tokio::spawn(collect(a, 1)), tokio::spawn(collect(b, 1)));
    // give both handlers time to subscribe
    tokio::time::sleep(Duration::from_millis(100)).await;

    post("/events", json!({"kind": "sensor", "target": "contact_front_door", "value": true})).await;
    post("/ticks", json!({"seconds": 1})).await;
    let (ea, eb) = (ta.await.unwrap(), tb.await.unwrap());
    assert_eq!(ea, eb);
    assert_eq!(ea[0]["fired_at"], "2026-10-15T09:00:01");
    assert!(ea[0]["message"].as_str().unwrap().contains("close the door"));

    let log = http.get(format!("{base}/notifications?since=0")).send().await.unwrap();
    assert_eq!(serde_json::from_str::<Value>(&log.text().await.unwrap()).unwrap().as_array().unwrap().len(), 1);
    server.abort();
    engine.shutdown().await.unwrap();
    join.join().unwrap();
}

/// Log lines, broadcast events and the per-reminder fire counts all agree.
#[tokio::test]
async fn notifications_are_conserved() {
    let dir = tempfile::tempdir().unwrap();
    let app = common::App::open(dir.path());
    for phrase in [
        "remind me to close the door every day when the front door opens",
        "remind me to check the stove every day when the front door opens and the stove is on",
        "remind me to take my pills after dinner every day",
        "remind me to stretch every day at 9:05am",
    ] {
        assert_eq!(app.author(&[phrase, "yes"]).await["stage"], "done", "{phrase}");
    }
    let mut rx = app.engine.subscribe();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
    let mut fired = 0;
    for _ in 0..400 {
        let body = match rng.gen_range(0..4) {
            0 => json!({"kind": "sensor", "target": "contact_front_door", "value": rng.gen::<bool>()}),
            1 => json!({"kind": "sensor", "target": "stove_activity", "value": rng.gen_range(0.0..3.0)}),
            2 => json!({"kind": "activity", "target": (["eating", "none", "relaxing"][rng.gen_range(0..3)])}),
            _ => json!({"kind": "sensor", "target": "plug_microwave", "value": 0.0}),
        };
        app.ok("POST", "/events", Some(&body.to_string())).await;
        let secs = rng.gen_range(1..=3600);
        let r = app.ok("POST", "/ticks", Some(&json!({"seconds": secs}).to_string())).await;
        fired += r["fired"].as_array().unwrap().len();
    }
    let mut streamed = 0;
    while rx.try_recv().is_ok() {
        streamed += 1;
    }
    let log = app.ok("GET", "/notifications?since=0", None).await;
    let state = app.ok("GET", "/state", None).await;
    assert!(fired > 20, "{fired}");
    assert_eq!(log.as_array().unwrap().len(), fired);
    assert_eq!(streamed, fired);
    assert_eq!(state["notifications"], fired);
    let tail = app.ok("GET", &format!("/notifications?since={}", fired - 3), None).await;
    assert_eq!(tail.as_array().unwrap()[..], log.as_array().unwrap()[fired - 3..]);
    assert_eq!(app.ok("GET", &format!("/notifications?since={}", fired + 5), None).await, json!([]));
    let lines = std::fs::read_to_string(dir.path().join("notifications.jsonl")).unwrap();
    app.shutdown().await;
    assert_eq!(lines.lines().count(), fired);
}

/// A pending delay survives a restart and fires at its original time.
#[tokio::test]
async fn pending_delays_survive_restart() {
    let dir = tempfile::tempdir().unwrap();
    let app = common::App::open(dir.path());
    let r = app.author(&["remind me to check the stove 5 minutes after the microwave stops", "yes"]).await;
    assert_eq!(r["stage"], "done", "{r}");
    app.ok("POST", "/events", Some(r#"{"kind":"sensor","target":"plug_microwave","value":900}"#)).await;
    app.ok("POST", "/ticks", Some(r#"{"seconds": 10}"#)).await;
    app.ok("POST", "/events", Some(r#"{"kind":"sensor","target":"plug_microwave","value":0}"#)).await;
    app.ok("POST", "/ticks", Some(r#"{"seconds": 100}"#)).await;
    app.shutdown().await;

    let app = common::App::open(dir.path());
    let state = app.ok("GET", "/state", None).await;
    assert_eq!(state["now"], "2026-10-15T09:01:50");
    let r = app.ok("POST", "/ticks", Some(r#"{"seconds": 300}"#)).await;
    let fired = r["fired"].as_array().unwrap();
    assert_eq!(fired.len(), 1, "{r}");
    assert_eq!(fired[0]["fired_at"], "2026-10-15T09:05:11");
    app.shutdown().await;
}

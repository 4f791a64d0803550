use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use futures::StreamExt;
use serde_json::{json, Value};
use std::sync::Arc;
use std::time::Duration;
use tower::ServiceExt;
use v2a_core::pipeline::PipelineTrace;
use v2a_core::scene::SceneState;
use v2a_service::server::{router, AppState};
use v2a_service::ServiceConfig;

const MISHEARD: &str = "select the highest beauty on mean sea";

fn app() -> Router {
    router(Arc::new(AppState::new(ServiceConfig::default()).unwrap()))
}

async fn call(app: &Router, method: &str, uri: &str, body: Option<Value>) -> (StatusCode, Vec<u8>) {
    let req = Request::builder().method(method).uri(uri);
    let req = match body {
        Some(v) => req
            .header("content-type", "application/json")
            .body(Body::from(v.to_string()))
            .unwrap(),
        None => req.body(Body::empty()).unwrap(),
    };
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = axum::body::to_bytes(resp.into_body(), usize::MAX).await.unwrap();
    (status, bytes.to_vec())
}

async fn new_session(app: &Router, body: Value) -> String {
    let (status, bytes) = call(app, "POST", "/sessions", Some(body)).await;
    assert_eq!(status, StatusCode::CREATED, "{}", String::from_utf8_lossy(&bytes));
    let v: Value = serde_json::from_slice(&bytes).unwrap();
    v["id"].as_str().unwrap().to_string()
}

#[tokio::test]
async fn healthz_is_ok() {
    let (status, body) = call(&app(), "GET", "/healthz", None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body, b"ok");
}

#[tokio::test]
async fn session_scene_echoes_the_fixture() {
    let app = app();
    let fixture = SceneState::fixture().to_document();
    let id = new_session(&app, json!({ "scene": fixture })).await;
    let (status, body) = call(&app, "GET", &format!("/sessions/{id}/scene"), None).await;
    assert_eq!(status, StatusCode::OK);
    let snap: Value = serde_json::from_slice(&body).unwrap();
    assert_eq!(snap["scene"], serde_json::to_value(&fixture).unwrap());
    assert_eq!(snap["frame"], 0);
    assert_eq!(snap["selection"], json!([]));
}

#[tokio::test]
async fn misheard_command_over_http() {
    let app = app();
    let id = new_session(&app, json!({})).await;
    let (status, body) = call(&app, "POST", &format!("/sessions/{id}/command"), Some(json!({ "text": MISHEARD }))).await;
    assert_eq!(status, StatusCode::OK);
    let trace: PipelineTrace = serde_json::from_slice(&body).unwrap();
    assert!(trace.passed(), "{:?}", trace.feedback);
    assert_eq!(trace.t0.as_deref(), Some("select the highest building on main street"));
    assert!(trace.t2.as_deref().unwrap().contains("scale_getter"));

    let (_, body) = call(&app, "GET", &format!("/sessions/{id}/metrics"), None).await;
    let rows: Value = serde_json::from_slice(&body).unwrap();
    assert_eq!(rows.as_array().unwrap().len(), 1);
    assert_eq!(rows[0]["command"], "c1");
    assert_eq!(rows[0]["n_token"], trace.n_token);

    let (_, body) = call(&app, "GET", &format!("/sessions/{id}/scene"), None).await;
    let snap: Value = serde_json::from_slice(&body).unwrap();
    assert_eq!(snap["selection"], json!(trace.selection));
}

#[tokio::test]
async fn corrupt_flag_mishears_before_the_pipeline() {
    let app = app();
    let id = new_session(&app, json!({})).await;
    let (_, body) = call(
        &app,
        "POST",
        &format!("/sessions/{id}/command"),
        Some(json!({ "text": "select the highest building on main street", "corrupt": true })),
    )
    .await;
    let trace: PipelineTrace = serde_json::from_slice(&body).unwrap();
    assert_ne!(trace.raw, "select the highest building on main street");
    assert_eq!(trace.t0.as_deref(), Some("select the highest building on main street"));
    assert!(trace.passed());
}

#[tokio::test]
async fn errors_are_json_with_status() {
    let app = app();
    let (status, body) = call(&app, "GET", "/sessions/nope/scene", None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    let v: Value = serde_json::from_slice(&body).unwrap();
    assert!(v["error"].as_str().unwrap().contains("nope"));

    let (status, _) = call(&app, "POST", "/sessions", Some(json!({ "baseline": "LLM-Nothing" }))).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);

    let bad_scene = json!({ "scene": { "entities": [{ "id": "x", "kind": "dragon", "position": [0,0,0], "scale": [1,1,1] }] } });
    let (status, _) = call(&app, "POST", "/sessions", Some(bad_scene)).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);

    let id = new_session(&app, json!({})).await;
    let (status, _) = call(&app, "POST", &format!("/sessions/{id}/command"), Some(json!({ "text": "  " }))).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn baseline_choice_shapes_the_trace() {
    let app = app();
    let id = new_session(&app, json!({ "baseline": "llm-exe" })).await;
    let (_, body) = call(&app, "POST", &format!("/sessions/{id}/command"), Some(json!({ "text": MISHEARD }))).await;
    let trace: PipelineTrace = serde_json::from_slice(&body).unwrap();
    assert_eq!(trace.baseline, "LLM-Exe");
    assert!(trace.t0.is_none() && trace.t1.is_none() && trace.t2.is_none());
    assert!(trace.plan.is_some());
}

#[tokio::test]
async fn event_stream_carries_stages_and_the_scene_delta() {
    let app = app();
    let id = new_session(&app, json!({})).await;
    let resp = app
        .clone()
        .oneshot(Request::get(format!("/sessions/{id}/events")).body(Body::empty()).unwrap())
        .await
        .unwrap();
    assert_eq!(resp.status(), StatusCode::OK);
    assert!(resp.headers()["content-type"].to_str().unwrap().starts_with("text/event-stream"));
    let mut stream = resp.into_body().into_data_stream();

    let (status, _) = call(&app, "POST", &format!("/sessions/{id}/command"), Some(json!({ "text": MISHEARD }))).await;
    assert_eq!(status, StatusCode::OK);

    let mut text = String::new();
    while !text.contains("event: scene_delta") {
        let chunk = tokio::time::timeout(Duration::from_secs(5), stream.next())
            .await
            .expect("event within 5s")
            .expect("stream open")
            .unwrap();
        text.push_str(&String::from_utf8_lossy(&chunk));
    }
    let payloads: Vec<Value> = text
        .lines()
        .filter_map(|l| l.strip_prefix("data: "))
        .map(|d| serde_json::from_str(d).unwrap())
        .collect();
    let stages: Vec<&str> = payloads
        .iter()
        .filter(|p| p["type"] == "pipeline" && p["event"]["event"] == "stage_completed")
        .map(|p| p["event"]["stage"].as_str().unwrap())
        .collect();
    assert_eq!(stages, ["pre", "cls", "ext", "exe"]);
    assert!(payloads.iter().any(|p| p["event"]["event"] == "finished" && p["event"]["pass"] == true));
    let delta = payloads.last().unwrap();
    assert_eq!(delta["type"], "scene_delta");
    assert_eq!(delta["command"], "c1");
    assert_eq!(delta["selection"].as_array().unwrap().len(), 1);
}

#[tokio::test]
async fn sessions_are_independent_under_concurrency() {
    let app = app();
    let a = new_session(&app, json!({})).await;
    let b = new_session(&app, json!({})).await;
    let send = |id: String, text: &'static str| {
        let app = app.clone();
        tokio::spawn(async move {
            call(&app, "POST", &format!("/sessions/{id}/command"), Some(json!({ "text": text }))).await
        })
    };
    let handles = vec![
        send(a.clone(), MISHEARD),
        send(a.clone(), "deselect everything"),
        send(b.clone(), MISHEARD),
    ];
    for h in handles {
        assert_eq!(h.await.unwrap().0, StatusCode::OK);
    }
    let rows = |id: String| {
        let app = app.clone();
        async move {
            let (_, body) = call(&app, "GET", &format!("/sessions/{id}/metrics"), None).await;
            serde_json::from_slice::<Vec<Value>>(&body).unwrap()
        }
    };
    let ra = rows(a).await;
    let rb = rows(b).await;
    assert_eq!(ra.len(), 2);
    assert_eq!(rb.len(), 1);
    let ids: Vec<_> = ra.iter().map(|r| r["command"].as_str().unwrap()).collect();
    assert_eq!(ids, ["c1", "c2"]);
}

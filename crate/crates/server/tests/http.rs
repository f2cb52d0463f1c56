use std::sync::Arc;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use bwqa::service::{bundled_scene, SessionStore};
use bwqa::spatial::Constants;
use bwqa::ulf::Grammar;
use bwqa_server::{router, AppState};
use futures_util::StreamExt;
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

fn app(dir: Option<std::path::PathBuf>) -> Router {
    let store = SessionStore::new(Arc::new(Grammar::bundled().clone()), Arc::new(Constants::default()), bundled_scene(), dir);
    router(AppState::new(store))
}

async fn call(app: &Router, method: &str, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let body = body.map_or_else(Body::empty, |b| Body::from(b.to_string()));
    let req = Request::builder().method(method).uri(uri).header("content-type", "application/json").body(body).unwrap();
    let res = app.clone().oneshot(req).await.unwrap();
    let status = res.status();
    let bytes = res.into_body().collect().await.unwrap().to_bytes();
    (status, serde_json::from_slice(&bytes).unwrap_or(Value::Null))
}

async fn new_session(app: &Router) -> String {
    let (status, v) = call(app, "POST", "/sessions", None).await;
    assert_eq!(status, StatusCode::CREATED);
    assert_eq!(v["greeting"], "Would you like to ask me a spatial question?");
    v["sessionId"].as_str().unwrap().to_string()
}

#[tokio::test]
async fn ask_returns_diagnostics() {
    let app = app(None);
    let id = new_session(&app).await;
    let (status, v) =
        call(&app, "POST", &format!("/sessions/{id}/ask"), Some(json!({"text": "What blocks are above the Mercedes block?"}))).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(v["response"], "Only the Target block.");
    assert!(v["ulf"].as_str().unwrap().contains("above.p"));
    assert!(v["frame"].is_string());
    assert_eq!(v["answer"]["confident"][0]["entity"], "Target");
    assert!(v["elapsed_ms"].is_number());
}

#[tokio::test]
async fn errors_carry_codes() {
    let app = app(None);
    let (status, v) = call(&app, "POST", "/sessions/nope/ask", Some(json!({"text": "hi"}))).await;
    assert_eq!((status, v["code"].as_str()), (StatusCode::NOT_FOUND, Some("UNKNOWN_SESSION")));
    assert!(v["message"].is_string());

    let id = new_session(&app).await;
    let (status, v) = call(&app, "POST", &format!("/sessions/{id}/ask"), Some(json!({"text": ""}))).await;
    assert_eq!((status, v["code"].as_str()), (StatusCode::BAD_REQUEST, Some("EMPTY_INPUT")));
    let (status, v) = call(&app, "POST", &format!("/sessions/{id}/ask"), Some(json!({"words": 3}))).await;
    assert_eq!((status, v["code"].as_str()), (StatusCode::BAD_REQUEST, Some("BAD_REQUEST")));

    let before = call(&app, "GET", &format!("/sessions/{id}/scene"), None).await.1;
    let (status, v) = call(&app, "POST", &format!("/sessions/{id}/move"), Some(json!({"label": "SRI", "x": 3.0, "y": 0.0}))).await;
    assert_eq!((status, v["code"].as_str()), (StatusCode::UNPROCESSABLE_ENTITY, Some("OUT_OF_BOUNDS")));
    assert_eq!(call(&app, "GET", &format!("/sessions/{id}/scene"), None).await.1, before);

    let (status, v) = call(&app, "POST", "/sessions", Some(json!({"blocks": "nope"}))).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert!(v["code"].is_string());
}

#[tokio::test]
async fn move_then_ask() {
    let app = app(None);
    let id = new_session(&app).await;
    let (status, v) = call(&app, "POST", &format!("/sessions/{id}/move"), Some(json!({"label": "SRI", "x": 0.3, "y": 0.1}))).await;
    assert_eq!(status, StatusCode::OK);
    assert!((v["position"][2].as_f64().unwrap() - 0.225).abs() < 1e-9);
    let (_, v) = call(&app, "POST", &format!("/sessions/{id}/ask"), Some(json!({"text": "Is the Starbucks block clear?"}))).await;
    assert_eq!(v["response"], "No, it is not.");
    let (_, t) = call(&app, "GET", &format!("/sessions/{id}/transcript"), None).await;
    let kinds: Vec<&str> = t["events"].as_array().unwrap().iter().map(|e| e["type"].as_str().unwrap()).collect();
    assert_eq!(kinds, ["header", "turn", "move", "turn"]);
}

#[tokio::test]
async fn reload_reproduces_scene_and_transcript() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().to_path_buf();
    let first = app(Some(dir.clone()));
    let id = new_session(&first).await;
    call(&first, "POST", &format!("/sessions/{id}/move"), Some(json!({"label": "Twitter", "x": 0.45, "y": 0.1}))).await;
    call(&first, "POST", &format!("/sessions/{id}/ask"), Some(json!({"text": "Is the Texaco block clear?"}))).await;
    let scene = call(&first, "GET", &format!("/sessions/{id}/scene"), None).await.1;
    let transcript = call(&first, "GET", &format!("/sessions/{id}/transcript"), None).await.1;

    let store = SessionStore::new(Arc::new(Grammar::bundled().clone()), Arc::new(Constants::default()), bundled_scene(), Some(dir.clone()));
    assert_eq!(store.load_persisted().unwrap(), 1);
    let second = router(AppState::new(store));
    assert_eq!(call(&second, "GET", &format!("/sessions/{id}/scene"), None).await.1, scene);
    assert_eq!(call(&second, "GET", &format!("/sessions/{id}/transcript"), None).await.1, transcript);
}

#[tokio::test]
async fn events_stream_scene_and_turns() {
    let app = app(None);
    let id = new_session(&app).await;
    let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
    let addr = listener.local_addr().unwrap();
    let server = app.clone();
    tokio::spawn(async move { axum::serve(listener, server).await.unwrap() });

    let (mut ws, _) = tokio_tungstenite::connect_async(format!("ws://{addr}/sessions/{id}/events")).await.unwrap();
    call(&app, "POST", &format!("/sessions/{id}/move"), Some(json!({"label": "SRI", "x": 0.3, "y": 0.1}))).await;
    call(&app, "POST", &format!("/sessions/{id}/ask"), Some(json!({"text": "Is the Starbucks block clear?"}))).await;

    let mut next = async || -> Value {
        let msg = tokio::time::timeout(std::time::Duration::from_secs(5), ws.next()).await.unwrap().unwrap().unwrap();
        serde_json::from_str(msg.to_text().unwrap()).unwrap()
    };
    let scene = next().await;
    assert_eq!(scene["type"], "scene-updated");
    assert!(scene["scene"]["blocks"].is_array());
    let turn = next().await;
    assert_eq!(turn["type"], "turn-added");
    assert_eq!(turn["index"], 1);
    assert_eq!(turn["turn"]["utterances"][0], "No, it is not.");

    let missing = tokio_tungstenite::connect_async(format!("ws://{addr}/sessions/nope/events")).await;
    assert!(missing.is_err());
}

//! HTTP and WebSocket front end over a [`SessionStore`].

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use axum::body::Bytes;
use axum::extract::ws::{Message, WebSocket, WebSocketUpgrade};
use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use bwqa::service::{Event, ServiceError, SessionStore};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use tokio::sync::broadcast;

/// Events buffered per subscriber before it starts lagging.
const EVENT_BUFFER: usize = 64;

pub struct AppState {
    pub store: SessionStore,
    channels: Mutex<HashMap<String, broadcast::Sender<String>>>,
}

impl AppState {
    pub fn new(store: SessionStore) -> Arc<Self> {
        Arc::new(Self { store, channels: Mutex::new(HashMap::new()) })
    }

    fn channel(&self, id: &str) -> broadcast::Sender<String> {
        let mut map = self.channels.lock().expect("channel map lock");
        map.entry(id.to_string()).or_insert_with(|| broadcast::channel(EVENT_BUFFER).0).clone()
    }

    fn publish(&self, id: &str, event: Value) {
        // no subscribers is fine
        let _ = self.channel(id).send(event.to_string());
    }
}

/// `{code, message}` with a status picked from the code.
#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    code: String,
    message: String,
}

impl ApiError {
    fn bad_request(message: impl Into<String>) -> Self {
        Self { status: StatusCode::BAD_REQUEST, code: "BAD_REQUEST".into(), message: message.into() }
    }
}

impl From<ServiceError> for ApiError {
    fn from(e: ServiceError) -> Self {
        let status = match &e {
            ServiceError::UnknownSession(_) => StatusCode::NOT_FOUND,
            ServiceError::EmptyInput | ServiceError::InputTooLong { .. } => StatusCode::BAD_REQUEST,
            ServiceError::Io(_) => StatusCode::INTERNAL_SERVER_ERROR,
            ServiceError::Scene(_) | ServiceError::Transcript { .. } => StatusCode::UNPROCESSABLE_ENTITY,
        };
        Self { status, code: e.code().into(), message: e.to_string() }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(json!({ "code": self.code, "message": self.message }))).into_response()
    }
}

type ApiResult<T> = Result<T, ApiError>;

fn parse_body<T: DeserializeOwned>(body: &Bytes) -> ApiResult<T> {
    serde_json::from_slice(body).map_err(|e| ApiError::bad_request(e.to_string()))
}

#[derive(Debug, Deserialize)]
struct AskBody {
    text: String,
}

#[derive(Debug, Deserialize)]
struct MoveBody {
    label: String,
    x: f64,
    y: f64,
}

#[derive(Debug, Serialize)]
#[serde(rename_all = "camelCase")]
struct Created {
    session_id: String,
    greeting: String,
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/sessions", post(create_session))
        .route("/sessions/{id}/ask", post(ask))
        .route("/sessions/{id}/move", post(move_block))
        .route("/sessions/{id}/scene", get(scene))
        .route("/sessions/{id}/transcript", get(transcript))
        .route("/sessions/{id}/events", get(events))
        .with_state(state)
}

async fn create_session(State(st): State<Arc<AppState>>, body: String) -> ApiResult<(StatusCode, Json<Created>)> {
    let doc = Some(body.as_str()).filter(|b| !b.trim().is_empty());
    let (id, greeting) = st.store.create(doc)?;
    Ok((StatusCode::CREATED, Json(Created { session_id: id, greeting: greeting.text() })))
}

async fn ask(State(st): State<Arc<AppState>>, Path(id): Path<String>, body: Bytes) -> ApiResult<Json<Value>> {
    let AskBody { text } = parse_body(&body)?;
    let rec = st.store.get(&id)?;
    // turns are CPU bound; keep them off the reactor
    let (result, index) = tokio::task::spawn_blocking(move || {
        let mut rec = rec.lock().expect("session lock");
        let result = rec.ask(&text)?;
        let index = match rec.events.last() {
            Some(Event::Turn { index, .. }) => *index,
            _ => 0,
        };
        Ok::<_, ServiceError>((result, index))
    })
    .await
    .map_err(|e| ApiError { status: StatusCode::INTERNAL_SERVER_ERROR, code: "INTERNAL".into(), message: e.to_string() })??;
    st.publish(&id, json!({ "type": "turn-added", "index": index, "turn": result.turn }));
    Ok(Json(serde_json::to_value(&result).expect("answers serialize")))
}

async fn move_block(State(st): State<Arc<AppState>>, Path(id): Path<String>, body: Bytes) -> ApiResult<Json<Value>> {
    let MoveBody { label, x, y } = parse_body(&body)?;
    if !x.is_finite() || !y.is_finite() {
        return Err(ApiError::bad_request("coordinates must be finite"));
    }
    let result = st.store.handle_move(&id, &label, x, y)?;
    st.publish(&id, json!({ "type": "scene-updated", "revision": result.revision, "scene": result.scene }));
    Ok(Json(serde_json::to_value(&result).expect("moves serialize")))
}

async fn scene(State(st): State<Arc<AppState>>, Path(id): Path<String>) -> ApiResult<Json<Value>> {
    let doc = st.store.scene(&id)?;
    Ok(Json(serde_json::to_value(doc).expect("scenes serialize")))
}

async fn transcript(State(st): State<Arc<AppState>>, Path(id): Path<String>) -> ApiResult<Json<Value>> {
    let rec = st.store.get(&id)?;
    let events: Vec<Event> = rec.lock().expect("session lock").events.clone();
    Ok(Json(json!({ "sessionId": id, "events": events })))
}

async fn events(State(st): State<Arc<AppState>>, Path(id): Path<String>, ws: WebSocketUpgrade) -> ApiResult<Response> {
    st.store.get(&id)?;
    let rx = st.channel(&id).subscribe();
    Ok(ws.on_upgrade(move |socket| forward(socket, rx)))
}

async fn forward(mut socket: WebSocket, mut rx: broadcast::Receiver<String>) {
    loop {
        tokio::select! {
            msg = rx.recv() => match msg {
                Ok(text) => {
                    if socket.send(Message::Text(text.into())).await.is_err() {
                        break;
                    }
                }
                Err(broadcast::error::RecvError::Lagged(_)) => {
                    // the client refetches scene and transcript on this
                    let note = json!({ "type": "lagged" }).to_string();
                    if socket.send(Message::Text(note.into())).await.is_err() {
                        break;
                    }
                }
                Err(broadcast::error::RecvError::Closed) => break,
            },
            incoming = socket.recv() => match incoming {
                Some(Ok(Message::Close(_))) | None | Some(Err(_)) => break,
                Some(Ok(_)) => {}
            },
        }
    }
}

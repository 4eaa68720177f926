use std::net::SocketAddr;
use std::sync::Arc;

use axum::extract::ws::{Message, WebSocket, WebSocketUpgrade};
use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::get;
use axum::{Json, Router};
use tokio::sync::mpsc::{unbounded_channel, UnboundedReceiver};

use crate::hub::Hub;
use crate::protocol::{ClientMessage, ServerMessage};
use crate::record::RecordError;

/// Routes:
/// - `GET /ws` opens a new session; the first message names it.
/// - `GET /ws/{id}` joins a running session.
/// - `GET /sessions` lists recorded sessions.
/// - `GET /sessions/{id}/summary` returns a finished session's summary.
pub fn router(hub: Arc<Hub>) -> Router {
    Router::new()
        .route("/health", get(|| async { "ok" }))
        .route("/ws", get(open_session))
        .route("/ws/{id}", get(join_session))
        .route("/sessions", get(list_sessions))
        .route("/sessions/{id}/summary", get(session_summary))
        .with_state(hub)
}

pub async fn serve(hub: Arc<Hub>, addr: SocketAddr) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    tracing::info!("listening on {}", listener.local_addr()?);
    axum::serve(listener, router(hub)).await
}

fn session_hello(id: &str) -> String {
    serde_json::json!({ "type": "session", "id": id }).to_string()
}

async fn open_session(State(hub): State<Arc<Hub>>, ws: WebSocketUpgrade) -> Response {
    ws.on_upgrade(move |mut socket| async move {
        let id = uuid::Uuid::new_v4().to_string();
        let (tx, rx) = unbounded_channel();
        if let Err(e) = hub.create(&id, None, tx) {
            let msg = ServerMessage::Error {
                code: "invalid-config".into(),
                message: e.to_string(),
            };
            let _ = socket.send(Message::Text(msg.to_json().into())).await;
            return;
        }
        tracing::info!(session = %id, "session opened");
        if socket.send(Message::Text(session_hello(&id).into())).await.is_ok() {
            pump(socket, hub, id, rx).await;
        }
    })
}

async fn join_session(
    State(hub): State<Arc<Hub>>,
    Path(id): Path<String>,
    ws: WebSocketUpgrade,
) -> Response {
    match hub.subscribe(&id) {
        Ok(rx) => ws.on_upgrade(move |socket| pump(socket, hub, id, rx)),
        Err(e) => (StatusCode::NOT_FOUND, e.to_string()).into_response(),
    }
}

/// Relays between one socket and one session until either side closes.
async fn pump(
    mut socket: WebSocket,
    hub: Arc<Hub>,
    id: String,
    mut outbound: UnboundedReceiver<ServerMessage>,
) {
    loop {
        tokio::select! {
            out = outbound.recv() => {
                let Some(msg) = out else { break };
                if socket.send(Message::Text(msg.to_json().into())).await.is_err() {
                    break;
                }
            }
            incoming = socket.recv() => {
                let text = match incoming {
                    Some(Ok(Message::Text(t))) => t,
                    Some(Ok(Message::Close(_))) | Some(Err(_)) | None => break,
                    Some(Ok(_)) => continue,
                };
                let reply = match serde_json::from_str::<ClientMessage>(text.as_str()) {
                    Ok(msg) => hub.send(&id, msg).err().map(|e| e.to_message()),
                    Err(e) => Some(ServerMessage::Error {
                        code: "malformed-message".into(),
                        message: e.to_string(),
                    }),
                };
                if let Some(err) = reply {
                    if socket.send(Message::Text(err.to_json().into())).await.is_err() {
                        break;
                    }
                }
            }
        }
    }
    let _ = socket.send(Message::Close(None)).await;
}

async fn list_sessions(State(hub): State<Arc<Hub>>) -> Response {
    let Some(dir) = hub.data_dir() else {
        return Json(Vec::<String>::new()).into_response();
    };
    match dir.list() {
        Ok(ids) => Json(ids).into_response(),
        Err(e) => (StatusCode::INTERNAL_SERVER_ERROR, e.to_string()).into_response(),
    }
}

async fn session_summary(State(hub): State<Arc<Hub>>, Path(id): Path<String>) -> Response {
    let Some(dir) = hub.data_dir() else {
        return (StatusCode::NOT_FOUND, "sessions are not recorded").into_response();
    };
    match dir.load(&id) {
        Ok(record) => match record.summary() {
            Some(summary) => Json(summary.clone()).into_response(),
            None => (StatusCode::CONFLICT, "session has not ended").into_response(),
        },
        Err(RecordError::NotFound(_)) => (StatusCode::NOT_FOUND, "no such session").into_response(),
        Err(e) => (StatusCode::INTERNAL_SERVER_ERROR, e.to_string()).into_response(),
    }
}

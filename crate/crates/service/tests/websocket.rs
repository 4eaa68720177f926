use std::sync::Arc;

use confab::dialogue::DialogueRules;
use confab::feedback::{FeatureFrame, HmmModel};
use confab_service::hub::Hub;
use confab_service::server::router;
use confab_service::{ClientMessage, DataDir, SessionConfig};
use futures_util::{SinkExt, StreamExt};
use serde_json::Value;
use tokio_tungstenite::tungstenite::Message;

type Socket =
    tokio_tungstenite::WebSocketStream<tokio_tungstenite::MaybeTlsStream<tokio::net::TcpStream>>;

async fn start(data: DataDir) -> String {
    let hub = Arc::new(Hub::new(
        Arc::new(DialogueRules::shipped()),
        Arc::new(HmmModel::demo()),
        SessionConfig::default(),
        Some(data),
    ));
    let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
    let addr = listener.local_addr().unwrap();
    tokio::spawn(async move { axum::serve(listener, router(hub)).await.unwrap() });
    format!("127.0.0.1:{}", addr.port())
}

async fn next_json(ws: &mut Socket) -> Value {
    loop {
        match ws.next().await.expect("socket open").unwrap() {
            Message::Text(t) => return serde_json::from_str(t.as_str()).unwrap(),
            Message::Close(_) => panic!("closed"),
            _ => continue,
        }
    }
}

async fn send(ws: &mut Socket, msg: &ClientMessage) {
    ws.send(Message::Text(msg.to_json().into())).await.unwrap();
}

/// Reads until a message of type `kind`, returning everything read.
async fn until(ws: &mut Socket, kind: &str) -> Vec<Value> {
    let mut seen = Vec::new();
    loop {
        let v = next_json(ws).await;
        let done = v["type"] == kind;
        seen.push(v);
        if done {
            return seen;
        }
    }
}

#[tokio::test]
async fn full_session_over_websockets() {
    let tmp = tempfile::tempdir().unwrap();
    let host = start(DataDir::new(tmp.path())).await;

    let (mut a, _) = tokio_tungstenite::connect_async(format!("ws://{host}/ws")).await.unwrap();
    let first = next_json(&mut a).await;
    let opening = next_json(&mut a).await;
    let (hello, opening) = if first["type"] == "session" {
        (first, opening)
    } else {
        (opening, first)
    };
    let id = hello["id"].as_str().unwrap().to_string();
    assert_eq!(opening["type"], "agent_turn");
    assert_eq!(opening["provenance"], "scheduled-event");

    let (mut b, _) = tokio_tungstenite::connect_async(format!("ws://{host}/ws/{id}")).await.unwrap();

    send(&mut a, &ClientMessage::UserTurn { text: "my name is sam".into(), t_ms: 3_000 }).await;
    let reply = until(&mut a, "agent_turn").await;
    assert_eq!(reply.last().unwrap()["t_ms"], 4_200);
    assert_eq!(until(&mut b, "agent_turn").await, reply);

    for t in (4_000..12_000).step_by(100) {
        let mut f = FeatureFrame::neutral(t);
        if t < 8_000 {
            f.smile = 0.0;
        }
        send(&mut b, &ClientMessage::Frame(f)).await;
    }
    let icon_a = until(&mut a, "icon").await;
    let icon_b = until(&mut b, "icon").await;
    assert_eq!(icon_a, icon_b);
    assert_eq!(icon_a.last().unwrap()["cue"], "smile");
    assert_eq!(icon_a.last().unwrap()["color"], "flashing_red");

    a.send(Message::Text("{\"type\":\"dance\"}".into())).await.unwrap();
    let err = until(&mut a, "error").await;
    assert_eq!(err.last().unwrap()["code"], "malformed-message");

    send(&mut a, &ClientMessage::End).await;
    let summary = until(&mut a, "summary").await;
    let summary = summary.last().unwrap();
    assert!(summary["report"].as_str().unwrap().contains("Best Streak"));
    assert_eq!(until(&mut b, "summary").await.last().unwrap(), summary);

    let http = http_get(&host, &format!("/sessions/{id}/summary")).await;
    assert!(http.starts_with("HTTP/1.1 200"), "{http}");
    let http = http_get(&host, "/sessions/missing/summary").await;
    assert!(http.starts_with("HTTP/1.1 404"), "{http}");
}

#[tokio::test]
async fn joining_an_unknown_session_is_refused() {
    let tmp = tempfile::tempdir().unwrap();
    let host = start(DataDir::new(tmp.path())).await;
    assert!(tokio_tungstenite::connect_async(format!("ws://{host}/ws/nope")).await.is_err());
}

/// Minimal HTTP/1.1 GET over a raw socket.
async fn http_get(host: &str, path: &str) -> String {
    use tokio::io::{AsyncReadExt, AsyncWriteExt};
    let mut s = tokio::net::TcpStream::connect(host).await.unwrap();
    let req = format!("GET {path} HTTP/1.1\r\nHost: {host}\r\nConnection: close\r\n\r\n");
    s.write_all(req.as_bytes()).await.unwrap();
    let mut out = String::new();
    s.read_to_string(&mut out).await.unwrap();
    out
}

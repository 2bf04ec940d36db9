//! The WebSocket session server, driven by a real client.

use std::sync::Arc;
use std::time::Duration;

use futures::{SinkExt, StreamExt};
use itree_lang::corpus;
use itree_sim::server::{self, App};
use itree_sim::{Command, RejectReason, SimConfig, SimMsg, PROTOCOL_VERSION};
use tokio::net::{TcpListener, TcpStream};
use tokio_tungstenite::tungstenite::Message;
use tokio_tungstenite::{connect_async, MaybeTlsStream, WebSocketStream};

type Client = WebSocketStream<MaybeTlsStream<TcpStream>>;

async fn start(src: &str, process: &str) -> String {
    let program = itree_lang::load(src).unwrap();
    let tree = program.instantiate(process, program.default_args(process)).unwrap();
    let app = Arc::new(App {
        process: process.into(),
        tree,
        config: SimConfig::default(),
    });
    let listener = TcpListener::bind("127.0.0.1:0").await.unwrap();
    let addr = listener.local_addr().unwrap();
    tokio::spawn(server::serve(listener, app));
    format!("ws://{addr}/ws")
}

async fn recv(ws: &mut Client) -> SimMsg {
    loop {
        let frame = tokio::time::timeout(Duration::from_secs(10), ws.next())
            .await
            .expect("server answers")
            .expect("stream open")
            .expect("frame");
        if let Message::Text(t) = frame {
            return serde_json::from_str(t.as_str()).expect("server sends protocol messages");
        }
    }
}

/// Messages up to and including the next prompt or final message.
async fn until_prompt(ws: &mut Client) -> Vec<SimMsg> {
    let mut out = Vec::new();
    loop {
        let m = recv(ws).await;
        let done = matches!(
            m,
            SimMsg::Menu { .. }
                | SimMsg::ManySteps { .. }
                | SimMsg::Terminated { .. }
                | SimMsg::Deadlocked
                | SimMsg::Ended
        );
        out.push(m);
        if done {
            return out;
        }
    }
}

async fn send(ws: &mut Client, cmd: &Command) {
    ws.send(Message::Text(serde_json::to_string(cmd).unwrap().into()))
        .await
        .unwrap();
}

fn menu(msgs: &[SimMsg]) -> Vec<String> {
    match msgs.last() {
        Some(SimMsg::Menu { events, .. }) => events.iter().map(|e| e.to_string()).collect(),
        other => panic!("expected a menu, got {other:?}"),
    }
}

#[tokio::test]
async fn connecting_yields_the_initial_menu() {
    let url = start(corpus::BUFFER, "cbuffer").await;
    let (mut ws, _) = connect_async(&url).await.unwrap();
    let first = until_prompt(&mut ws).await;
    assert_eq!(
        first[0],
        SimMsg::Hello {
            version: PROTOCOL_VERSION,
            process: "cbuffer".into()
        }
    );
    assert!(first.contains(&SimMsg::StateNote {
        text: "{buf: []}".into()
    }));
    assert_eq!(menu(&first), ["Input.0", "Input.1", "Input.2", "Input.3", "State.[]"]);
}

#[tokio::test]
async fn buffer_scenario_over_the_wire() {
    let url = start(corpus::BUFFER, "cbuffer").await;
    let (mut ws, _) = connect_async(&url).await.unwrap();
    until_prompt(&mut ws).await;
    send(&mut ws, &Command::choose_event("Input.1")).await;
    let m = until_prompt(&mut ws).await;
    assert_eq!(
        m[0],
        SimMsg::Accepted {
            event: "Input.1".parse().unwrap()
        }
    );
    send(&mut ws, &Command::choose_index(1)).await;
    until_prompt(&mut ws).await;
    send(&mut ws, &Command::choose_event("Output.2")).await;
    let m = until_prompt(&mut ws).await;
    assert_eq!(
        m[0],
        SimMsg::Rejected {
            input: "Output.2".into(),
            reason: RejectReason::NotEnabled
        }
    );
    send(&mut ws, &Command::choose_event("State.[1,1]")).await;
    let m = until_prompt(&mut ws).await;
    assert!(m.contains(&SimMsg::StateNote {
        text: "{buf: [1,1]}".into()
    }));
    assert!(menu(&m).contains(&"Output.1".to_string()));
}

#[tokio::test]
async fn concurrent_sessions_are_independent() {
    let url = start(corpus::BUFFER, "buffer").await;
    let (mut x, _) = connect_async(&url).await.unwrap();
    let (mut y, _) = connect_async(&url).await.unwrap();
    until_prompt(&mut x).await;
    until_prompt(&mut y).await;
    send(&mut x, &Command::choose_event("Input.3")).await;
    send(&mut y, &Command::choose_event("Input.0")).await;
    let mx = until_prompt(&mut x).await;
    let my = until_prompt(&mut y).await;
    assert!(menu(&mx).contains(&"Output.3".to_string()));
    assert!(menu(&my).contains(&"Output.0".to_string()));
    send(&mut y, &Command::choose_event("Output.0")).await;
    let my = until_prompt(&mut y).await;
    assert_eq!(menu(&my), ["Input.0", "Input.1", "Input.2", "Input.3", "State.[]"]);
    send(&mut x, &Command::choose_event("State.[3]")).await;
    let mx = until_prompt(&mut x).await;
    assert!(menu(&mx).contains(&"Output.3".to_string()));
}

#[tokio::test]
async fn malformed_frames_are_rejected_and_the_session_survives() {
    let url = start(corpus::BUFFER, "buffer").await;
    let (mut ws, _) = connect_async(&url).await.unwrap();
    let first = until_prompt(&mut ws).await;
    for bad in ["not json", r#"{"type":"jump"}"#, r#"{"type":"choose"}"#] {
        ws.send(Message::Text(bad.into())).await.unwrap();
        let m = until_prompt(&mut ws).await;
        assert!(
            matches!(
                &m[0],
                SimMsg::Rejected {
                    reason: RejectReason::BadFrame,
                    ..
                }
            ),
            "{bad}: {m:?}"
        );
        assert_eq!(menu(&m), menu(&first));
    }
    ws.send(Message::Binary(vec![1u8, 2, 3].into())).await.unwrap();
    let m = until_prompt(&mut ws).await;
    assert!(matches!(
        &m[0],
        SimMsg::Rejected {
            reason: RejectReason::BadFrame,
            ..
        }
    ));
    send(&mut ws, &Command::choose_event("Input.2")).await;
    let m = until_prompt(&mut ws).await;
    assert!(menu(&m).contains(&"Output.2".to_string()));
}

#[tokio::test]
async fn continue_and_reset() {
    let url = start("process D = div", "D").await;
    let (mut ws, _) = connect_async(&url).await.unwrap();
    let m = until_prompt(&mut ws).await;
    assert_eq!(m[1..], [SimMsg::InternalActivity, SimMsg::ManySteps { count: 20 }]);
    send(&mut ws, &Command::choose_index(0)).await;
    let m = until_prompt(&mut ws).await;
    assert!(matches!(
        &m[0],
        SimMsg::Rejected {
            reason: RejectReason::Unexpected,
            ..
        }
    ));
    send(&mut ws, &Command::Continue).await;
    let m = until_prompt(&mut ws).await;
    assert_eq!(m, [SimMsg::InternalActivity, SimMsg::ManySteps { count: 20 }]);
    send(&mut ws, &Command::End).await;
    assert_eq!(until_prompt(&mut ws).await, [SimMsg::Ended]);
    send(&mut ws, &Command::Reset).await;
    let m = until_prompt(&mut ws).await;
    assert!(matches!(m[0], SimMsg::Hello { .. }));
    assert_eq!(m.last(), Some(&SimMsg::ManySteps { count: 20 }));
}

//! WebSocket session server: one simulation session per connection.
//!
//! Clients connect to `/ws`, receive `hello` and the first prompt, and then
//! exchange one JSON message per text frame (see [`crate::protocol`]). All
//! sessions step the same elaborated process, which is immutable and shared;
//! nothing else is shared between connections.

use std::io;
use std::sync::Arc;

use axum::extract::ws::{Message, WebSocket, WebSocketUpgrade};
use axum::extract::State;
use axum::response::IntoResponse;
use axum::routing::get;
use axum::Router;
use itree_core::{ITree, Value};
use tokio::net::TcpListener;

use crate::protocol::{Command, SimMsg};
use crate::session::{Session, SimConfig};

pub struct App {
    pub process: String,
    pub tree: ITree<Value>,
    pub config: SimConfig,
}

pub fn router(app: Arc<App>) -> Router {
    Router::new().route("/ws", get(upgrade)).with_state(app)
}

pub async fn serve(listener: TcpListener, app: Arc<App>) -> io::Result<()> {
    axum::serve(listener, router(app)).await
}

async fn upgrade(ws: WebSocketUpgrade, State(app): State<Arc<App>>) -> impl IntoResponse {
    ws.on_upgrade(move |socket| run_session(socket, app))
}

enum Input {
    Command(Command),
    Bad(String),
}

async fn run_session(mut socket: WebSocket, app: Arc<App>) {
    let mut session = Session::new(app.process.clone(), app.tree.clone(), app.config);
    let (s, msgs) = step(session, None).await;
    session = s;
    if send(&mut socket, msgs).await.is_err() {
        return;
    }
    while let Some(frame) = socket.recv().await {
        let input = match frame {
            Ok(Message::Text(text)) => match serde_json::from_str::<Command>(text.as_str()) {
                Ok(cmd) => Input::Command(cmd),
                Err(_) => Input::Bad(text.to_string()),
            },
            Ok(Message::Binary(_)) => Input::Bad("<binary frame>".into()),
            Ok(Message::Ping(_) | Message::Pong(_)) => continue,
            Ok(Message::Close(_)) => break,
            Err(e) => {
                log::debug!("session {}: {e}", app.process);
                break;
            }
        };
        let (s, msgs) = step(session, Some(input)).await;
        session = s;
        if send(&mut socket, msgs).await.is_err() {
            break;
        }
    }
}

/// Runs one session step off the async workers: forcing a large process can
/// take a while.
async fn step(mut session: Session, input: Option<Input>) -> (Session, Vec<SimMsg>) {
    tokio::task::spawn_blocking(move || {
        let msgs = match input {
            None => session.start(),
            Some(Input::Command(cmd)) => session.handle(cmd),
            Some(Input::Bad(text)) => session.bad_frame(&text),
        };
        (session, msgs)
    })
    .await
    .expect("session step panicked")
}

async fn send(socket: &mut WebSocket, msgs: Vec<SimMsg>) -> Result<(), axum::Error> {
    for m in msgs {
        socket.send(Message::Text(m.to_json().into())).await?;
    }
    Ok(())
}

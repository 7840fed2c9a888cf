//! WebSocket service. One task owns the [`Engine`]; connection handlers only
//! (de)serialize and talk to it through an ordered command queue.

use std::collections::{BTreeMap, VecDeque};
use std::net::SocketAddr;
use std::sync::atomic::{AtomicBool, AtomicU64, AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::time::Duration;

use anyhow::{Context, Result};
use axum::extract::ws::{Message, WebSocket, WebSocketUpgrade};
use axum::extract::State;
use axum::response::Response;
use axum::routing::get;
use axum::{Json, Router};
use serde_json::json;
use tokio::net::TcpListener;
use tokio::sync::{mpsc, Notify};
use tokio::task::JoinHandle;
use tokio::time::{interval, Instant, MissedTickBehavior};

use improvise_core::engine::Engine;
use improvise_core::protocol::{ClientMessage, ServerMessage};

use crate::config::Config;
use crate::content::ContentLibrary;

const COMMAND_QUEUE: usize = 1024;

/// A serialized message waiting for one client.
#[derive(Debug, Clone)]
struct Outgoing {
    frame: bool,
    text: Arc<str>,
}

/// Per-client queue. A new frame replaces any frame still waiting, so a slow
/// client gets the latest frame instead of a backlog. Other messages are
/// never dropped.
#[derive(Debug, Default)]
pub struct Outbox {
    queue: Mutex<VecDeque<Outgoing>>,
    notify: Notify,
    closed: AtomicBool,
    dropped: AtomicU64,
}

impl Outbox {
    pub fn new() -> Arc<Self> {
        Arc::new(Outbox::default())
    }

    pub fn push(&self, msg: &ServerMessage) {
        self.push_text(msg.is_frame(), msg.to_json().into());
    }

    fn push_text(&self, frame: bool, text: Arc<str>) {
        let mut q = self.queue.lock().expect("outbox lock");
        if frame {
            let before = q.len();
            q.retain(|m| !m.frame);
            self.dropped.fetch_add((before - q.len()) as u64, Ordering::Relaxed);
        }
        q.push_back(Outgoing { frame, text });
        drop(q);
        self.notify.notify_one();
    }

    /// Everything queued, oldest first.
    pub fn drain(&self) -> Vec<Arc<str>> {
        self.queue.lock().expect("outbox lock").drain(..).map(|m| m.text).collect()
    }

    pub fn len(&self) -> usize {
        self.queue.lock().expect("outbox lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dropped_frames(&self) -> u64 {
        self.dropped.load(Ordering::Relaxed)
    }

    pub fn close(&self) {
        self.closed.store(true, Ordering::Release);
        self.notify.notify_one();
    }

    /// Waits for queued messages; `None` once closed and empty.
    pub async fn next_batch(&self) -> Option<Vec<Arc<str>>> {
        loop {
            let notified = self.notify.notified();
            let batch = self.drain();
            if !batch.is_empty() {
                return Some(batch);
            }
            if self.closed.load(Ordering::Acquire) {
                return None;
            }
            notified.await;
        }
    }
}

pub type ClientId = u64;

#[derive(Debug)]
pub enum EngineCommand {
    Connect { client: ClientId, outbox: Arc<Outbox> },
    Disconnect { client: ClientId },
    /// Raw text from a client; parse errors are answered to that client only.
    Text { client: ClientId, text: String },
    /// Input from a local source such as a MIDI device.
    Input(ClientMessage),
}

struct EngineLoop {
    engine: Engine,
    library: ContentLibrary,
    clients: BTreeMap<ClientId, Arc<Outbox>>,
}

impl EngineLoop {
    fn broadcast(&self, msgs: &[ServerMessage]) {
        for m in msgs {
            let text: Arc<str> = m.to_json().into();
            for outbox in self.clients.values() {
                outbox.push_text(m.is_frame(), text.clone());
            }
        }
    }

    fn reply(&self, client: ClientId, msg: &ServerMessage) {
        if let Some(outbox) = self.clients.get(&client) {
            outbox.push(msg);
        }
    }

    fn content_list(&self) -> ServerMessage {
        ServerMessage::ContentList { entries: self.library.entries().to_vec() }
    }

    fn apply(&mut self, msg: ClientMessage, from: Option<ClientId>) {
        let out = self.engine.handle(msg, &self.library);
        // errors go back to whoever caused them; everything else is shared state
        let (errors, shared): (Vec<_>, Vec<_>) = out.into_iter().partition(|m| matches!(m, ServerMessage::Error { .. }));
        for e in &errors {
            match from {
                Some(client) => self.reply(client, e),
                None => tracing::warn!(error = %e.to_json(), "local input rejected"),
            }
        }
        self.broadcast(&shared);
    }

    fn command(&mut self, cmd: EngineCommand) {
        match cmd {
            EngineCommand::Connect { client, outbox } => {
                outbox.push(&self.engine.lesson_list());
                outbox.push(&self.content_list());
                outbox.push(&ServerMessage::Frame(self.engine.frame()));
                self.clients.insert(client, outbox);
                tracing::info!(client, clients = self.clients.len(), "client connected");
            }
            EngineCommand::Disconnect { client } => {
                if let Some(outbox) = self.clients.remove(&client) {
                    outbox.close();
                }
                tracing::info!(client, clients = self.clients.len(), "client disconnected");
            }
            EngineCommand::Text { client, text } => match ClientMessage::parse(&text) {
                Ok(msg) => self.apply(msg, Some(client)),
                Err(e) => self.reply(client, &ServerMessage::error(format!("malformed message: {e}"))),
            },
            EngineCommand::Input(msg) => self.apply(msg, None),
        }
    }
}

/// Spawns the engine loop. It advances the clock at `frame_rate` Hz while the
/// transport runs and stops when every command sender is dropped.
pub fn spawn_engine(engine: Engine, library: ContentLibrary, frame_rate: u32) -> (mpsc::Sender<EngineCommand>, JoinHandle<()>) {
    let (tx, mut rx) = mpsc::channel(COMMAND_QUEUE);
    let mut state = EngineLoop { engine, library, clients: BTreeMap::new() };
    let period = Duration::from_secs_f64(1.0 / frame_rate.max(1) as f64);
    let task = tokio::spawn(async move {
        let mut ticker = interval(period);
        ticker.set_missed_tick_behavior(MissedTickBehavior::Skip);
        let mut last = Instant::now();
        loop {
            tokio::select! {
                biased;
                cmd = rx.recv() => match cmd {
                    Some(cmd) => state.command(cmd),
                    None => break,
                },
                now = ticker.tick() => {
                    let elapsed = now.duration_since(last).as_secs_f64() * 1e3;
                    last = now;
                    let out = state.engine.advance(elapsed);
                    state.broadcast(&out);
                }
            }
        }
        for outbox in state.clients.values() {
            outbox.close();
        }
    });
    (tx, task)
}

#[derive(Clone)]
struct AppState {
    commands: mpsc::Sender<EngineCommand>,
    next_client: Arc<AtomicU64>,
    connected: Arc<AtomicUsize>,
}

pub fn router(commands: mpsc::Sender<EngineCommand>) -> Router {
    let state = AppState {
        commands,
        next_client: Arc::new(AtomicU64::new(1)),
        connected: Arc::new(AtomicUsize::new(0)),
    };
    Router::new().route("/ws", get(upgrade)).route("/health", get(health)).with_state(state)
}

async fn health(State(state): State<AppState>) -> Json<serde_json::Value> {
    Json(json!({
        "status": "ok",
        "version": env!("CARGO_PKG_VERSION"),
        "clients": state.connected.load(Ordering::Relaxed),
        "engine": if state.commands.is_closed() { "stopped" } else { "running" },
    }))
}

async fn upgrade(ws: WebSocketUpgrade, State(state): State<AppState>) -> Response {
    ws.on_upgrade(move |socket| session(socket, state))
}

async fn session(mut socket: WebSocket, state: AppState) {
    let client = state.next_client.fetch_add(1, Ordering::Relaxed);
    let outbox = Outbox::new();
    if state.commands.send(EngineCommand::Connect { client, outbox: outbox.clone() }).await.is_err() {
        return;
    }
    state.connected.fetch_add(1, Ordering::Relaxed);
    loop {
        tokio::select! {
            incoming = socket.recv() => match incoming {
                Some(Ok(Message::Text(text))) => {
                    let cmd = EngineCommand::Text { client, text: text.as_str().to_owned() };
                    if state.commands.send(cmd).await.is_err() {
                        break;
                    }
                }
                Some(Ok(Message::Binary(_))) => {
                    outbox.push(&ServerMessage::error("binary messages are not supported; send JSON text"));
                }
                Some(Ok(Message::Close(_))) | None | Some(Err(_)) => break,
                Some(Ok(_)) => {}
            },
            batch = outbox.next_batch() => match batch {
                Some(batch) => {
                    let mut failed = false;
                    for text in batch {
                        if socket.send(Message::Text(text.as_ref().into())).await.is_err() {
                            failed = true;
                            break;
                        }
                    }
                    if failed {
                        break;
                    }
                }
                None => break,
            },
        }
    }
    state.connected.fetch_sub(1, Ordering::Relaxed);
    let _ = state.commands.send(EngineCommand::Disconnect { client }).await;
}

/// Binds the listening socket, turning "address in use" into a readable error.
pub async fn bind(host: &str, port: u16) -> Result<TcpListener> {
    match TcpListener::bind((host, port)).await {
        Ok(l) => Ok(l),
        Err(e) if e.kind() == std::io::ErrorKind::AddrInUse => Err(anyhow::anyhow!(
            "port {port} on {host} is already in use; stop the other process or choose another port (--port / IMPROVISE_PORT)"
        )),
        Err(e) => Err(e).with_context(|| format!("binding {host}:{port}")),
    }
}

/// A running service.
pub struct Service {
    pub addr: SocketAddr,
    pub commands: mpsc::Sender<EngineCommand>,
    pub engine: JoinHandle<()>,
    pub http: JoinHandle<std::io::Result<()>>,
}

/// Starts the engine loop and HTTP/WebSocket server on `listener`.
pub fn start(config: &Config, library: ContentLibrary, listener: TcpListener) -> Result<Service> {
    let engine = Engine::new(config.settings()?);
    let addr = listener.local_addr()?;
    let (commands, engine) = spawn_engine(engine, library, config.frame_rate);
    let app = router(commands.clone());
    let http = tokio::spawn(async move { axum::serve(listener, app).await });
    tracing::info!(%addr, "listening");
    Ok(Service { addr, commands, engine, http })
}

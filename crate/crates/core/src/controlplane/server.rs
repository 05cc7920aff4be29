//! Network front end for [`ControlPlane`].
//!
//! One owner task holds the plane and applies requests in arrival order.
//! Connection tasks only parse lines and forward them. TCP peers speak one
//! JSON message per line; WebSocket peers on `/ws` send the same JSON, one
//! or more lines per text frame, and receive one message per frame.

use std::collections::BTreeMap;
use std::io::Write;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::time::Duration;

use axum::extract::ws::{Message, WebSocket, WebSocketUpgrade};
use axum::extract::State;
use axum::response::Response;
use axum::routing::get;
use axum::Router;
use thiserror::Error;
use tokio::io::{AsyncBufReadExt, AsyncWriteExt, BufReader};
use tokio::net::{TcpListener, TcpStream};
use tokio::sync::{mpsc, watch};
use tokio::task::JoinHandle;
use tokio::time::Instant;
use tower_http::services::ServeDir;

use super::protocol::{parse_client_line, to_line, ServerMessage};
use super::{
    parse_command_log, CommandGrammar, ControlError, ControlPlane, ControlPlaneConfig, DeviceRegistry, PeerRole,
};

#[derive(Debug, Error)]
pub enum ServerError {
    #[error("cannot bind {addr}: {source}")]
    Bind { addr: SocketAddr, source: std::io::Error },
    #[error("command log {path}: {source}")]
    CommandLog { path: PathBuf, source: std::io::Error },
    #[error("command log {path}: {source}")]
    CommandLogParse { path: PathBuf, source: ControlError },
    #[error("dashboard directory {0} does not exist")]
    MissingDashboard(PathBuf),
    #[error("the dashboard is served from the web-socket listener, which is not configured")]
    DashboardWithoutWs,
}

#[derive(Debug, Clone)]
pub struct ServerConfig {
    pub listen: SocketAddr,
    /// Address for the `/ws` bridge (and dashboard assets).
    pub ws_listen: Option<SocketAddr>,
    pub dashboard_dir: Option<PathBuf>,
    pub plane: ControlPlaneConfig,
    pub grammar: CommandGrammar,
    pub registry: DeviceRegistry,
    /// Applied device commands are appended here and replayed on start.
    pub command_log: Option<PathBuf>,
    /// How often expiries and relocks are checked.
    pub tick: Duration,
}

impl Default for ServerConfig {
    fn default() -> Self {
        Self {
            listen: SocketAddr::from(([127, 0, 0, 1], 7878)),
            ws_listen: None,
            dashboard_dir: None,
            plane: ControlPlaneConfig::default(),
            grammar: CommandGrammar::lab_default(),
            registry: DeviceRegistry::lab_default(),
            command_log: None,
            tick: Duration::from_millis(50),
        }
    }
}

enum Request {
    Connect {
        peer: u64,
        tx: mpsc::UnboundedSender<String>,
    },
    Line {
        peer: u64,
        line: String,
    },
    Disconnect {
        peer: u64,
    },
}

struct Peer {
    tx: mpsc::UnboundedSender<String>,
    role: Option<PeerRole>,
}

struct Owner {
    plane: ControlPlane,
    peers: BTreeMap<u64, Peer>,
    log: Option<std::fs::File>,
    start: Instant,
}

impl Owner {
    fn now(&self) -> u64 {
        self.start.elapsed().as_millis() as u64
    }

    fn broadcast(&mut self, msgs: &[ServerMessage]) {
        for msg in msgs {
            let line = to_line(msg);
            self.peers.retain(|_, p| p.tx.send(line.clone()).is_ok());
        }
    }

    fn send(&self, peer: u64, msg: &ServerMessage) {
        if let Some(p) = self.peers.get(&peer) {
            let _ = p.tx.send(to_line(msg));
        }
    }

    fn line(&mut self, peer: u64, line: &str) {
        let Some(role) = self.peers.get(&peer).map(|p| p.role) else {
            return;
        };
        let msg = match parse_client_line(line) {
            Ok(m) => m,
            Err(e) => return self.send(peer, &ServerMessage::error(&e)),
        };
        let now = self.now();
        let outcome = self.plane.handle(role, &format!("peer-{peer}"), msg, now);
        if let ServerMessage::Welcome { role, .. } = &outcome.reply {
            if let Some(p) = self.peers.get_mut(&peer) {
                p.role = Some(*role);
            }
        }
        if let (Some(cmd), Some(file)) = (&outcome.logged, self.log.as_mut()) {
            if let Err(e) = writeln!(file, "{}", to_line(cmd)).and_then(|_| file.flush()) {
                tracing::error!("command log write failed: {e}");
            }
        }
        self.send(peer, &outcome.reply);
        self.broadcast(&outcome.broadcast);
    }

    async fn run(mut self, mut rx: mpsc::UnboundedReceiver<Request>, tick: Duration, mut stop: watch::Receiver<bool>) {
        let mut ticker = tokio::time::interval(tick);
        ticker.set_missed_tick_behavior(tokio::time::MissedTickBehavior::Delay);
        loop {
            tokio::select! {
                req = rx.recv() => match req {
                    Some(Request::Connect { peer, tx }) => {
                        self.peers.insert(peer, Peer { tx, role: None });
                    }
                    Some(Request::Line { peer, line }) => self.line(peer, &line),
                    Some(Request::Disconnect { peer }) => {
                        self.peers.remove(&peer);
                    }
                    None => break,
                },
                _ = ticker.tick() => {
                    let now = self.now();
                    let msgs = self.plane.tick(now);
                    self.broadcast(&msgs);
                }
                _ = stop.changed() => break,
            }
        }
    }
}

#[derive(Clone)]
struct Hub {
    requests: mpsc::UnboundedSender<Request>,
    next_peer: std::sync::Arc<std::sync::atomic::AtomicU64>,
}

impl Hub {
    fn register(&self) -> Option<(u64, mpsc::UnboundedReceiver<String>)> {
        let peer = self.next_peer.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
        let (tx, rx) = mpsc::unbounded_channel();
        self.requests.send(Request::Connect { peer, tx }).ok()?;
        Some((peer, rx))
    }

    fn submit(&self, peer: u64, text: &str) {
        for line in text.lines().filter(|l| !l.trim().is_empty()) {
            let _ = self.requests.send(Request::Line {
                peer,
                line: line.to_owned(),
            });
        }
    }

    fn leave(&self, peer: u64) {
        let _ = self.requests.send(Request::Disconnect { peer });
    }
}

async fn tcp_peer(hub: Hub, stream: TcpStream) {
    let _ = stream.set_nodelay(true);
    let Some((peer, mut outbox)) = hub.register() else {
        return;
    };
    let (r, mut w) = stream.into_split();
    let mut lines = BufReader::new(r).lines();
    loop {
        tokio::select! {
            line = lines.next_line() => match line {
                Ok(Some(line)) => hub.submit(peer, &line),
                Ok(None) => break,
                Err(e) => {
                    // Invalid UTF-8 ends the stream; report and drop the peer.
                    let err = ServerMessage::Error { code: "malformed".into(), detail: e.to_string() };
                    let _ = w.write_all(format!("{}\n", to_line(&err)).as_bytes()).await;
                    break;
                }
            },
            out = outbox.recv() => match out {
                Some(text) => {
                    if w.write_all(format!("{text}\n").as_bytes()).await.is_err() {
                        break;
                    }
                }
                None => break,
            },
        }
    }
    hub.leave(peer);
}

async fn ws_upgrade(State(hub): State<Hub>, ws: WebSocketUpgrade) -> Response {
    ws.on_upgrade(move |socket| ws_peer(hub, socket))
}

async fn ws_peer(hub: Hub, mut socket: WebSocket) {
    let Some((peer, mut outbox)) = hub.register() else {
        return;
    };
    loop {
        tokio::select! {
            msg = socket.recv() => match msg {
                Some(Ok(Message::Text(text))) => hub.submit(peer, text.as_str()),
                Some(Ok(Message::Binary(bytes))) => match std::str::from_utf8(&bytes) {
                    Ok(text) => hub.submit(peer, text),
                    Err(e) => {
                        let err = ServerMessage::error(&ControlError::Malformed(e.to_string()));
                        if socket.send(Message::Text(to_line(&err).into())).await.is_err() {
                            break;
                        }
                    }
                },
                Some(Ok(Message::Close(_))) | None | Some(Err(_)) => break,
                Some(Ok(_)) => {}
            },
            out = outbox.recv() => match out {
                Some(text) => {
                    if socket.send(Message::Text(text.into())).await.is_err() {
                        break;
                    }
                }
                None => break,
            },
        }
    }
    hub.leave(peer);
}

/// A started server. Dropping it leaves the server running until the
/// runtime shuts down; call [`RunningServer::shutdown`] to stop it.
pub struct RunningServer {
    tcp_addr: SocketAddr,
    ws_addr: Option<SocketAddr>,
    stop: watch::Sender<bool>,
    tasks: Vec<JoinHandle<()>>,
}

impl RunningServer {
    pub fn tcp_addr(&self) -> SocketAddr {
        self.tcp_addr
    }

    pub fn ws_addr(&self) -> Option<SocketAddr> {
        self.ws_addr
    }

    pub async fn shutdown(self) {
        let _ = self.stop.send(true);
        for t in self.tasks {
            let _ = t.await;
        }
    }
}

async fn bind(addr: SocketAddr) -> Result<TcpListener, ServerError> {
    TcpListener::bind(addr)
        .await
        .map_err(|source| ServerError::Bind { addr, source })
}

fn open_log(cfg: &ServerConfig) -> Result<(DeviceRegistry, Option<std::fs::File>), ServerError> {
    let Some(path) = &cfg.command_log else {
        return Ok((cfg.registry.clone(), None));
    };
    let io_err = |source| ServerError::CommandLog {
        path: path.clone(),
        source,
    };
    let registry = match std::fs::read_to_string(path) {
        Ok(text) => {
            let cmds = parse_command_log(&text).map_err(|source| ServerError::CommandLogParse {
                path: path.clone(),
                source,
            })?;
            cfg.registry.clone().replay(&cmds)
        }
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => cfg.registry.clone(),
        Err(e) => return Err(io_err(e)),
    };
    let file = std::fs::OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .map_err(io_err)?;
    Ok((registry, Some(file)))
}

/// Bind the listeners, replay the command log and start serving.
pub async fn serve(cfg: ServerConfig) -> Result<RunningServer, ServerError> {
    if let Some(dir) = &cfg.dashboard_dir {
        if cfg.ws_listen.is_none() {
            return Err(ServerError::DashboardWithoutWs);
        }
        if !dir.is_dir() {
            return Err(ServerError::MissingDashboard(dir.clone()));
        }
    }
    let (registry, log) = open_log(&cfg)?;
    let tcp = bind(cfg.listen).await?;
    let ws = match cfg.ws_listen {
        Some(addr) => Some(bind(addr).await?),
        None => None,
    };
    let tcp_addr = tcp.local_addr().map_err(|source| ServerError::Bind {
        addr: cfg.listen,
        source,
    })?;
    let ws_addr = ws.as_ref().and_then(|l| l.local_addr().ok());

    let (req_tx, req_rx) = mpsc::unbounded_channel();
    let (stop_tx, stop_rx) = watch::channel(false);
    let owner = Owner {
        plane: ControlPlane::new(cfg.plane.clone(), cfg.grammar.clone(), registry),
        peers: BTreeMap::new(),
        log,
        start: Instant::now(),
    };
    let hub = Hub {
        requests: req_tx,
        next_peer: Default::default(),
    };

    let mut tasks = vec![tokio::spawn(owner.run(req_rx, cfg.tick, stop_rx.clone()))];

    let tcp_hub = hub.clone();
    let mut tcp_stop = stop_rx.clone();
    tasks.push(tokio::spawn(async move {
        loop {
            tokio::select! {
                accepted = tcp.accept() => match accepted {
                    Ok((stream, _)) => {
                        tokio::spawn(tcp_peer(tcp_hub.clone(), stream));
                    }
                    Err(e) => tracing::warn!("accept failed: {e}"),
                },
                _ = tcp_stop.changed() => break,
            }
        }
    }));

    if let Some(listener) = ws {
        let mut app = Router::new().route("/ws", get(ws_upgrade)).with_state(hub.clone());
        if let Some(dir) = &cfg.dashboard_dir {
            app = app.fallback_service(ServeDir::new(dir));
        }
        let mut ws_stop = stop_rx.clone();
        tasks.push(tokio::spawn(async move {
            let shutdown = async move {
                let _ = ws_stop.changed().await;
            };
            if let Err(e) = axum::serve(listener, app).with_graceful_shutdown(shutdown).await {
                tracing::error!("web-socket bridge stopped: {e}");
            }
        }));
    }

    tracing::info!(%tcp_addr, ?ws_addr, "control plane listening");
    Ok(RunningServer {
        tcp_addr,
        ws_addr,
        stop: stop_tx,
        tasks,
    })
}

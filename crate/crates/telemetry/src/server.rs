use std::collections::HashMap;
use std::io;
use std::net::SocketAddr;
use std::sync::{Arc, Mutex};

use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::Serialize;
use tokio::io::{AsyncBufReadExt, AsyncReadExt, AsyncWriteExt, BufReader};
use tokio::net::{TcpListener, TcpStream};
use tokio::sync::watch;
use tokio::task::JoinSet;

use crate::config::TelemetryConfig;
use crate::engine::{Ack, Counters, Engine, EngineError, IngestOutcome};
use crate::webhook::{DeliveryResult, Dispatcher};
use crate::wire::MAX_LINE_BYTES;

#[derive(Debug, thiserror::Error)]
pub enum ServerError {
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error("binding {addr}: {source}")]
    Bind { addr: String, source: io::Error },
}

struct Shared {
    engine: Mutex<Engine>,
    /// Taken at shutdown.
    dispatcher: Mutex<Option<Dispatcher>>,
    /// rule id -> webhook url
    hooks: HashMap<String, String>,
}

impl Shared {
    fn ingest(&self, line: &str) -> io::Result<IngestOutcome> {
        let out = self.engine.lock().expect("engine lock").ingest_line(line)?;
        self.dispatch(&out);
        Ok(out)
    }

    fn dispatch(&self, out: &IngestOutcome) {
        let dispatcher = self.dispatcher.lock().expect("dispatcher lock");
        let Some(d) = dispatcher.as_ref() else {
            return;
        };
        for n in &out.notifications {
            if let Some(url) = self.hooks.get(&n.rule_id) {
                d.send(url.clone(), n.clone());
            }
        }
    }
}

pub struct Server;

pub struct ServerHandle {
    pub http_addr: SocketAddr,
    pub tcp_addr: Option<SocketAddr>,
    shared: Arc<Shared>,
    stop: watch::Sender<bool>,
    tasks: JoinSet<()>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ShutdownReport {
    pub counters: Counters,
    pub deliveries: Vec<DeliveryResult>,
}

impl Server {
    /// Opens the data directory, binds both listeners and starts serving.
    /// Port 0 in a bind address picks a free port.
    pub async fn start(cfg: TelemetryConfig) -> Result<ServerHandle, ServerError> {
        let hooks = cfg
            .all_rules()
            .map_err(EngineError::from)?
            .into_iter()
            .map(|r| (r.rule_id, r.webhook_url))
            .collect();
        let deliveries = cfg.data_dir.join("deliveries.log");
        let policy = cfg.webhook.clone();
        let (http_bind, tcp_bind) = (cfg.http_bind.clone(), cfg.tcp_bind.clone());
        let engine = Engine::open(cfg)?;
        let shared = Arc::new(Shared {
            engine: Mutex::new(engine),
            dispatcher: Mutex::new(Some(Dispatcher::spawn(policy, Some(deliveries)))),
            hooks,
        });
        let (stop, stop_rx) = watch::channel(false);
        let mut tasks = JoinSet::new();

        let http = bind(&http_bind).await?;
        let http_addr = http.local_addr().map_err(|source| ServerError::Bind {
            addr: http_bind.clone(),
            source,
        })?;
        let app = router(Arc::clone(&shared));
        let mut rx = stop_rx.clone();
        tasks.spawn(async move {
            let graceful = async move {
                let _ = rx.wait_for(|s| *s).await;
            };
            if let Err(e) = axum::serve(http, app).with_graceful_shutdown(graceful).await {
                eprintln!("http server: {e}");
            }
        });

        let mut tcp_addr = None;
        if let Some(addr) = tcp_bind {
            let listener = bind(&addr).await?;
            tcp_addr = Some(listener.local_addr().map_err(|source| ServerError::Bind {
                addr: addr.clone(),
                source,
            })?);
            tasks.spawn(tcp_accept(listener, Arc::clone(&shared), stop_rx));
        }
        Ok(ServerHandle {
            http_addr,
            tcp_addr,
            shared,
            stop,
            tasks,
        })
    }
}

impl ServerHandle {
    pub fn counters(&self) -> Counters {
        self.shared.engine.lock().expect("engine lock").counters().clone()
    }

    /// Stops accepting, lets open connections finish, decides buffered
    /// readings and waits for pending webhook deliveries.
    pub async fn shutdown(mut self) -> io::Result<ShutdownReport> {
        let _ = self.stop.send(true);
        while self.tasks.join_next().await.is_some() {}
        let out = self.shared.engine.lock().expect("engine lock").flush()?;
        self.shared.dispatch(&out);
        let counters = self.counters();
        let dispatcher = self.shared.dispatcher.lock().expect("dispatcher lock").take();
        let deliveries = match dispatcher {
            Some(d) => d.shutdown().await,
            None => Vec::new(),
        };
        Ok(ShutdownReport {
            counters,
            deliveries,
        })
    }
}

async fn bind(addr: &str) -> Result<TcpListener, ServerError> {
    TcpListener::bind(addr)
        .await
        .map_err(|source| ServerError::Bind {
            addr: addr.to_string(),
            source,
        })
}

fn router(shared: Arc<Shared>) -> Router {
    Router::new()
        .route("/health", get(|| async { "ok" }))
        .route("/stats", get(stats))
        .route("/ingest", post(ingest))
        .route("/datastreams", get(list_streams))
        .route("/datastream/{*name}", get(latest))
        .with_state(shared)
}

#[derive(Serialize)]
struct LineReject {
    line: usize,
    reason: String,
}

#[derive(Serialize, Default)]
struct IngestSummary {
    accepted: u64,
    duplicates: u64,
    rejected: Vec<LineReject>,
    points: usize,
}

async fn ingest(State(shared): State<Arc<Shared>>, body: String) -> Response {
    let mut summary = IngestSummary::default();
    for (i, line) in body.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        match shared.ingest(line) {
            Ok(out) => {
                summary.points += out.points.len();
                match out.ack {
                    Some(Ack::Accepted) => summary.accepted += 1,
                    Some(Ack::Duplicate) => summary.duplicates += 1,
                    Some(Ack::Rejected(code)) => summary.rejected.push(LineReject {
                        line: i + 1,
                        reason: code.to_string(),
                    }),
                    None => {}
                }
            }
            Err(e) => {
                // lines before this one are stored; the client resends from here
                let body = serde_json::json!({
                    "error": format!("storage: {e}"),
                    "failed_line": i + 1,
                    "accepted": summary.accepted,
                });
                return (StatusCode::SERVICE_UNAVAILABLE, Json(body)).into_response();
            }
        }
    }
    Json(summary).into_response()
}

async fn stats(State(shared): State<Arc<Shared>>) -> Json<Counters> {
    Json(shared.engine.lock().expect("engine lock").counters().clone())
}

async fn list_streams(State(shared): State<Arc<Shared>>) -> Json<Vec<String>> {
    let streams = shared.engine.lock().expect("engine lock").streams();
    let names = streams.read().expect("datastream lock").names().map(String::from).collect();
    Json(names)
}

async fn latest(State(shared): State<Arc<Shared>>, Path(name): Path<String>) -> Response {
    let name = name.trim_start_matches('/');
    let name = name.strip_suffix("/latest").unwrap_or(name);
    let streams = shared.engine.lock().expect("engine lock").streams();
    let found = streams.read().expect("datastream lock").get_latest(name);
    match found {
        Some(l) => Json(l).into_response(),
        None => (StatusCode::NOT_FOUND, format!("no datastream {name:?}\n")).into_response(),
    }
}

async fn tcp_accept(listener: TcpListener, shared: Arc<Shared>, mut stop: watch::Receiver<bool>) {
    let mut conns = JoinSet::new();
    let conn_stop = stop.clone();
    loop {
        tokio::select! {
            _ = stop.wait_for(|s| *s) => break,
            accepted = listener.accept() => match accepted {
                Ok((sock, _)) => {
                    conns.spawn(tcp_conn(sock, Arc::clone(&shared), conn_stop.clone()));
                }
                Err(e) => eprintln!("tcp accept: {e}"),
            },
        }
    }
    while conns.join_next().await.is_some() {}
}

/// One reply line per input line: `ok`, `dup`, `err <code>`, or
/// `retry <reason>` when the record could not be stored.
async fn tcp_conn(sock: TcpStream, shared: Arc<Shared>, mut stop: watch::Receiver<bool>) {
    let (rd, mut wr) = sock.into_split();
    let mut rd = BufReader::new(rd);
    let limit = MAX_LINE_BYTES as u64 + 2;
    let mut buf = Vec::new();
    loop {
        buf.clear();
        let mut limited = (&mut rd).take(limit);
        let n = tokio::select! {
            _ = stop.wait_for(|s| *s) => break,
            n = limited.read_until(b'\n', &mut buf) => match n {
                Ok(n) => n,
                Err(_) => break,
            },
        };
        if n == 0 {
            break;
        }
        let reply = if !buf.ends_with(b"\n") && n as u64 == limit {
            // skip the rest of the oversized line
            let mut sink = Vec::new();
            if rd.read_until(b'\n', &mut sink).await.is_err() {
                break;
            }
            shared.engine.lock().expect("engine lock").count_reject("line_too_long");
            "err line_too_long".to_string()
        } else {
            match std::str::from_utf8(&buf) {
                Err(_) => {
                    shared.engine.lock().expect("engine lock").count_reject("invalid_utf8");
                    "err invalid_utf8".to_string()
                }
                Ok(line) if line.trim().is_empty() => continue,
                Ok(line) => match shared.ingest(line) {
                    Ok(out) => match out.ack {
                        Some(Ack::Accepted) => "ok".to_string(),
                        Some(Ack::Duplicate) => "dup".to_string(),
                        Some(Ack::Rejected(code)) => format!("err {code}"),
                        None => "ok".to_string(),
                    },
                    Err(e) => format!("retry {}", e.kind()),
                },
            }
        };
        if wr.write_all(format!("{reply}\n").as_bytes()).await.is_err() {
            break;
        }
    }
    let _ = wr.shutdown().await;
}

/// Serves until ctrl-c, then shuts down cleanly.
pub async fn run_until_signal(cfg: TelemetryConfig) -> Result<ShutdownReport, Box<dyn std::error::Error>> {
    let handle = Server::start(cfg).await?;
    eprintln!("http listening on {}", handle.http_addr);
    if let Some(a) = handle.tcp_addr {
        eprintln!("tcp listening on {a}");
    }
    tokio::signal::ctrl_c().await?;
    Ok(handle.shutdown().await?)
}

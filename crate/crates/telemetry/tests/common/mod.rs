#![allow(dead_code)]

use std::net::SocketAddr;
use std::path::Path;
use std::sync::{Arc, Mutex};

use axum::extract::State;
use axum::http::StatusCode;
use axum::routing::post;
use axum::Router;
use soilsense_telemetry::TelemetryConfig;

/// Local webhook receiver answering with a scripted status sequence
/// (200 once the script runs out) and recording every body.
#[derive(Clone)]
pub struct Sink {
    pub addr: SocketAddr,
    pub bodies: Arc<Mutex<Vec<String>>>,
}

struct SinkState {
    script: Mutex<Vec<u16>>,
    bodies: Arc<Mutex<Vec<String>>>,
}

impl Sink {
    pub async fn start(script: &[u16]) -> Self {
        let bodies = Arc::new(Mutex::new(Vec::new()));
        let state = Arc::new(SinkState {
            script: Mutex::new(script.iter().rev().copied().collect()),
            bodies: Arc::clone(&bodies),
        });
        let app = Router::new().route("/hook", post(hook)).with_state(state);
        let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
        let addr = listener.local_addr().unwrap();
        tokio::spawn(async move { axum::serve(listener, app).await.unwrap() });
        Self { addr, bodies }
    }

    pub fn url(&self) -> String {
        format!("http://{}/hook", self.addr)
    }

    pub fn bodies(&self) -> Vec<String> {
        self.bodies.lock().unwrap().clone()
    }
}

async fn hook(State(s): State<Arc<SinkState>>, body: String) -> StatusCode {
    s.bodies.lock().unwrap().push(body);
    let code = s.script.lock().unwrap().pop().unwrap_or(200);
    StatusCode::from_u16(code).unwrap()
}

pub fn config(dir: &Path) -> TelemetryConfig {
    TelemetryConfig {
        data_dir: dir.to_path_buf(),
        http_bind: "127.0.0.1:0".into(),
        tcp_bind: Some("127.0.0.1:0".into()),
        ..Default::default()
    }
}

pub fn reading(node: &str, ts: &str, role: &str, lux: f64) -> String {
    format!(r#"{{"node":"{node}","ts":"{ts}","role":"{role}","mode":"day","lux":{lux}}}"#)
}

//! Ingestion service for soiling sensor nodes.
//!
//! Records arrive as newline-delimited JSON over TCP or `POST /ingest`.
//! Completed open/glass pairs become blockage points that are appended to
//! day-partitioned files, published on per-node datastreams and checked
//! against alert rules, whose notifications go out as webhooks.

pub mod alerts;
pub mod config;
pub mod datastream;
pub mod engine;
pub mod replay;
pub mod server;
pub mod store;
pub mod webhook;
pub mod wire;

pub use alerts::{AlertEngine, AlertRule, Notification};
pub use config::TelemetryConfig;
pub use datastream::{Datastreams, Latest};
pub use engine::{Ack, Counters, Engine, IngestOutcome};
pub use replay::{replay, ReplayReport};
pub use server::{run_until_signal, Server, ServerHandle, ShutdownReport};
pub use wire::{parse_record, Record, RejectCode, ValueRecord, WireRecord};

use std::collections::{BTreeMap, HashSet};
use std::io;
use std::sync::{Arc, RwLock};

use chrono::{DateTime, Utc};
use serde::Serialize;
use soilsense_core::soiling::{BlockagePoint, Pairer, PairingOutcome, Role, SoilingError};

use crate::alerts::{AlertEngine, Notification};
use crate::config::{ConfigError, TelemetryConfig};
use crate::datastream::Datastreams;
use crate::replay::raw_lines;
use crate::store::Store;
use crate::wire::{parse_record, Record, RejectCode};

#[derive(Debug, Clone, PartialEq)]
pub enum Ack {
    Accepted,
    Duplicate,
    Rejected(RejectCode),
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct IngestOutcome {
    pub ack: Option<Ack>,
    /// Points completed by this record (possibly for earlier readings).
    pub points: Vec<(String, BlockagePoint)>,
    pub notifications: Vec<Notification>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Counters {
    pub lines: u64,
    pub accepted: u64,
    pub duplicates: u64,
    /// Wire-level rejects by reason code.
    pub rejected: BTreeMap<String, u64>,
    pub points: u64,
    pub values: u64,
    pub unpaired: u64,
    pub open_in_night_mode: u64,
    pub below_floor: u64,
    pub missing_calibration: u64,
}

impl Counters {
    pub fn rejected_total(&self) -> u64 {
        self.rejected.values().sum()
    }
}

#[derive(Debug, thiserror::Error)]
pub enum EngineError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("storage: {0}")]
    Io(#[from] io::Error),
}

/// Ingestion state machine: dedupe, pairing, persistence, datastreams and
/// alert evaluation. One owner; the server wraps it in a mutex.
#[derive(Debug)]
pub struct Engine {
    cfg: TelemetryConfig,
    /// `None` while rebuilding state from an existing raw log.
    store: Option<Store>,
    pairer: Pairer,
    seen_readings: HashSet<(String, DateTime<Utc>, Role)>,
    seen_values: HashSet<(String, DateTime<Utc>, String)>,
    streams: Arc<RwLock<Datastreams>>,
    alerts: AlertEngine,
    alerts_enabled: bool,
    counters: Counters,
}

impl Engine {
    /// Opens the data directory. Existing raw partitions are read back to
    /// restore dedupe, pairing, datastream and rate-limit state; nothing is
    /// rewritten and no notifications are sent for them.
    pub fn open(cfg: TelemetryConfig) -> Result<Self, EngineError> {
        cfg.validate()?;
        let tz = cfg.tz()?;
        let rules = cfg.all_rules()?;
        let mut engine = Self {
            pairer: Pairer::new(cfg.pairing_window()),
            seen_readings: HashSet::new(),
            seen_values: HashSet::new(),
            streams: Arc::new(RwLock::new(Datastreams::default())),
            alerts: AlertEngine::new(rules, cfg.level_bounds),
            alerts_enabled: cfg.alerts_enabled,
            counters: Counters::default(),
            store: None,
            cfg,
        };
        let store = Store::open(&engine.cfg.data_dir, tz)?;
        let existing = raw_lines(&store.raw_dir())?;
        if !existing.is_empty() {
            for line in &existing {
                engine.ingest_line(line)?;
            }
            // a clean shutdown flushed these already
            engine.flush()?;
            engine.counters = Counters::default();
        }
        engine.store = Some(store);
        Ok(engine)
    }

    pub fn config(&self) -> &TelemetryConfig {
        &self.cfg
    }

    pub fn set_alerts_enabled(&mut self, on: bool) {
        self.alerts_enabled = on;
    }

    pub fn streams(&self) -> Arc<RwLock<Datastreams>> {
        Arc::clone(&self.streams)
    }

    pub fn counters(&self) -> &Counters {
        &self.counters
    }

    /// Counts a line rejected before it reached the parser.
    pub fn count_reject(&mut self, code: &str) {
        self.counters.lines += 1;
        *self.counters.rejected.entry(code.to_string()).or_default() += 1;
    }

    pub fn buffered(&self) -> usize {
        self.pairer.buffered()
    }

    /// Handles one wire line. An `Err` means nothing was stored and the
    /// sender may retry; every other outcome is final.
    pub fn ingest_line(&mut self, line: &str) -> io::Result<IngestOutcome> {
        let line = line.trim_end_matches(['\r', '\n']);
        self.counters.lines += 1;
        let record = match parse_record(line) {
            Ok(r) => r,
            Err(code) => {
                *self.counters.rejected.entry(code.to_string()).or_default() += 1;
                return Ok(IngestOutcome {
                    ack: Some(Ack::Rejected(code)),
                    ..Default::default()
                });
            }
        };
        let mut out = IngestOutcome::default();
        match record {
            Record::Reading(w) => {
                let key = (w.node.clone(), w.ts, w.role);
                if self.seen_readings.contains(&key) {
                    self.counters.duplicates += 1;
                    out.ack = Some(Ack::Duplicate);
                    return Ok(out);
                }
                if let Some(store) = self.store.as_mut() {
                    store.append_raw(w.ts, line)?;
                }
                self.seen_readings.insert(key);
                self.counters.accepted += 1;
                let outcome = self.pairer.push(w.into_reading());
                self.absorb(outcome, &mut out)?;
            }
            Record::Value(v) => {
                let key = (v.node.clone(), v.ts, v.stream.clone());
                if self.seen_values.contains(&key) {
                    self.counters.duplicates += 1;
                    out.ack = Some(Ack::Duplicate);
                    return Ok(out);
                }
                if let Some(store) = self.store.as_mut() {
                    store.append_raw(v.ts, line)?;
                    store.append_value(&v)?;
                }
                self.seen_values.insert(key);
                self.counters.accepted += 1;
                self.counters.values += 1;
                self.streams
                    .write()
                    .expect("datastream lock")
                    .update(&v.stream_name(), v.ts, v.value);
            }
        }
        out.ack = Some(Ack::Accepted);
        Ok(out)
    }

    /// Decides every buffered reading, e.g. at shutdown or the end of a replay.
    pub fn flush(&mut self) -> io::Result<IngestOutcome> {
        let mut out = IngestOutcome::default();
        let outcome = self.pairer.flush();
        self.absorb(outcome, &mut out)?;
        if let Some(s) = self.store.as_mut() {
            s.sync()?;
        }
        Ok(out)
    }

    fn absorb(&mut self, outcome: PairingOutcome, out: &mut IngestOutcome) -> io::Result<()> {
        for r in &outcome.rejects {
            match r.reason.code() {
                "open_in_night_mode" => self.counters.open_in_night_mode += 1,
                _ => self.counters.unpaired += 1,
            }
        }
        for pair in outcome.pairs {
            match BlockagePoint::day(pair.glass.timestamp, pair.open.lux, pair.glass.lux, self.cfg.day_floor_lux) {
                Ok(p) => self.emit(pair.glass.node_id, p, out)?,
                Err(SoilingError::BelowValidityFloor { .. }) => self.counters.below_floor += 1,
                // negative lux is rejected at the wire, so nothing else reaches here
                Err(_) => self.counters.below_floor += 1,
            }
        }
        for r in outcome.night {
            let led = self.cfg.led_for(&r.node_id);
            match BlockagePoint::night(r.timestamp, led, r.lux, &r.node_id) {
                Ok(p) => self.emit(r.node_id, p, out)?,
                Err(_) => self.counters.missing_calibration += 1,
            }
        }
        Ok(())
    }

    fn emit(&mut self, node: String, p: BlockagePoint, out: &mut IngestOutcome) -> io::Result<()> {
        if let Some(store) = self.store.as_mut() {
            store.append_point(&node, &p)?;
        }
        self.counters.points += 1;
        self.streams
            .write()
            .expect("datastream lock")
            .update(&format!("{node}/blockage"), p.timestamp, p.blockage);
        // evaluated during state rebuild too, so rate limits survive restarts
        let fired = self.alerts.evaluate(&node, &p);
        if self.alerts_enabled && self.store.is_some() {
            out.notifications.extend(fired);
        }
        out.points.push((node, p));
        Ok(())
    }
}

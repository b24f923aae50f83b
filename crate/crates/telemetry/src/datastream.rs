use std::collections::BTreeMap;

use chrono::{DateTime, Utc};
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Latest {
    #[serde(serialize_with = "ser_ts")]
    pub ts: DateTime<Utc>,
    pub value: f64,
}

fn ser_ts<S: serde::Serializer>(ts: &DateTime<Utc>, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&crate::wire::format_ts(*ts))
}

#[derive(Debug, Clone, PartialEq)]
struct Stream {
    latest: Latest,
    updates: u64,
}

/// Latest value per named stream, e.g. `node1/blockage`.
#[derive(Debug, Clone, Default)]
pub struct Datastreams {
    streams: BTreeMap<String, Stream>,
}

impl Datastreams {
    /// Older timestamps never replace a newer latest value.
    pub fn update(&mut self, name: &str, ts: DateTime<Utc>, value: f64) -> bool {
        match self.streams.get_mut(name) {
            Some(s) => {
                s.updates += 1;
                if ts >= s.latest.ts {
                    s.latest = Latest { ts, value };
                    true
                } else {
                    false
                }
            }
            None => {
                self.streams.insert(
                    name.to_string(),
                    Stream {
                        latest: Latest { ts, value },
                        updates: 1,
                    },
                );
                true
            }
        }
    }

    pub fn get_latest(&self, name: &str) -> Option<Latest> {
        self.streams.get(name).map(|s| s.latest)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.streams.keys().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.streams.len()
    }

    pub fn is_empty(&self) -> bool {
        self.streams.is_empty()
    }
}

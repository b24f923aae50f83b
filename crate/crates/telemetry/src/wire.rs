//! Newline-delimited JSON records.
//!
//! Sensor reading: `{"node":"n1","ts":"2024-04-05T12:00:00Z","role":"open","mode":"day","lux":50000}`
//!
//! Value post (image class, detector output): `{"node":"n1","ts":"…","stream":"image_dust","value":1}`

use std::fmt;

use chrono::{DateTime, SecondsFormat, Utc};
use serde::Serialize;
use serde_json::{Map, Value};
use soilsense_core::soiling::{LuxReading, Mode, Role};

pub const MAX_LINE_BYTES: usize = 64 * 1024;

pub fn format_ts(ts: DateTime<Utc>) -> String {
    ts.to_rfc3339_opts(SecondsFormat::AutoSi, true)
}

#[derive(Debug, Clone, PartialEq)]
pub struct WireRecord {
    pub node: String,
    pub ts: DateTime<Utc>,
    pub role: Role,
    pub mode: Mode,
    pub lux: f64,
}

impl WireRecord {
    pub fn to_line(&self) -> String {
        #[derive(Serialize)]
        struct Out<'a> {
            node: &'a str,
            ts: String,
            role: &'static str,
            mode: &'static str,
            lux: f64,
        }
        serde_json::to_string(&Out {
            node: &self.node,
            ts: format_ts(self.ts),
            role: self.role.as_str(),
            mode: self.mode.as_str(),
            lux: self.lux,
        })
        .expect("plain struct serialises")
    }

    pub fn into_reading(self) -> LuxReading {
        LuxReading {
            node_id: self.node,
            timestamp: self.ts,
            role: self.role,
            mode: self.mode,
            lux: self.lux,
        }
    }
}

impl From<&LuxReading> for WireRecord {
    fn from(r: &LuxReading) -> Self {
        WireRecord {
            node: r.node_id.clone(),
            ts: r.timestamp,
            role: r.role,
            mode: r.mode,
            lux: r.lux,
        }
    }
}

/// A scalar posted to `{node}/{stream}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueRecord {
    pub node: String,
    pub ts: DateTime<Utc>,
    pub stream: String,
    pub value: f64,
}

impl ValueRecord {
    pub fn to_line(&self) -> String {
        #[derive(Serialize)]
        struct Out<'a> {
            node: &'a str,
            ts: String,
            stream: &'a str,
            value: f64,
        }
        serde_json::to_string(&Out {
            node: &self.node,
            ts: format_ts(self.ts),
            stream: &self.stream,
            value: self.value,
        })
        .expect("plain struct serialises")
    }

    pub fn stream_name(&self) -> String {
        format!("{}/{}", self.node, self.stream)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Record {
    Reading(WireRecord),
    Value(ValueRecord),
}

impl Record {
    pub fn node(&self) -> &str {
        match self {
            Record::Reading(r) => &r.node,
            Record::Value(v) => &v.node,
        }
    }

    pub fn ts(&self) -> DateTime<Utc> {
        match self {
            Record::Reading(r) => r.ts,
            Record::Value(v) => v.ts,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RejectCode {
    EmptyLine,
    LineTooLong,
    InvalidJson,
    NotObject,
    MissingField(&'static str),
    BadType(&'static str),
    BadTimestamp,
    BadRole,
    BadMode,
    NegativeLux,
    NonFiniteValue,
    EmptyName(&'static str),
}

impl fmt::Display for RejectCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RejectCode::EmptyLine => f.write_str("empty_line"),
            RejectCode::LineTooLong => f.write_str("line_too_long"),
            RejectCode::InvalidJson => f.write_str("invalid_json"),
            RejectCode::NotObject => f.write_str("not_object"),
            RejectCode::MissingField(name) => write!(f, "missing_field:{name}"),
            RejectCode::BadType(name) => write!(f, "bad_type:{name}"),
            RejectCode::BadTimestamp => f.write_str("bad_timestamp"),
            RejectCode::BadRole => f.write_str("bad_role"),
            RejectCode::BadMode => f.write_str("bad_mode"),
            RejectCode::NegativeLux => f.write_str("negative_lux"),
            RejectCode::NonFiniteValue => f.write_str("non_finite_value"),
            RejectCode::EmptyName(name) => write!(f, "empty_field:{name}"),
        }
    }
}

fn field<'a>(obj: &'a Map<String, Value>, name: &'static str) -> Result<&'a Value, RejectCode> {
    match obj.get(name) {
        None | Some(Value::Null) => Err(RejectCode::MissingField(name)),
        Some(v) => Ok(v),
    }
}

fn str_field<'a>(obj: &'a Map<String, Value>, name: &'static str) -> Result<&'a str, RejectCode> {
    field(obj, name)?.as_str().ok_or(RejectCode::BadType(name))
}

fn num_field(obj: &Map<String, Value>, name: &'static str) -> Result<f64, RejectCode> {
    let v = field(obj, name)?.as_f64().ok_or(RejectCode::BadType(name))?;
    if !v.is_finite() {
        return Err(RejectCode::NonFiniteValue);
    }
    Ok(v)
}

fn name_field(obj: &Map<String, Value>, name: &'static str) -> Result<String, RejectCode> {
    let s = str_field(obj, name)?;
    if s.trim().is_empty() {
        return Err(RejectCode::EmptyName(name));
    }
    Ok(s.to_string())
}

/// Strict validation of one line; unknown fields are ignored. A `stream`
/// field makes it a value post, otherwise it must be a sensor reading.
pub fn parse_record(line: &str) -> Result<Record, RejectCode> {
    let line = line.trim_end_matches(['\r', '\n']);
    if line.len() > MAX_LINE_BYTES {
        return Err(RejectCode::LineTooLong);
    }
    if line.trim().is_empty() {
        return Err(RejectCode::EmptyLine);
    }
    let value: Value = serde_json::from_str(line).map_err(|_| RejectCode::InvalidJson)?;
    let Value::Object(obj) = value else {
        return Err(RejectCode::NotObject);
    };
    let node = name_field(&obj, "node")?;
    let ts_text = str_field(&obj, "ts")?;
    let ts = DateTime::parse_from_rfc3339(ts_text)
        .map_err(|_| RejectCode::BadTimestamp)?
        .with_timezone(&Utc);

    if obj.contains_key("stream") {
        let stream = name_field(&obj, "stream")?;
        let value = num_field(&obj, "value")?;
        return Ok(Record::Value(ValueRecord {
            node,
            ts,
            stream,
            value,
        }));
    }

    let role = match str_field(&obj, "role")? {
        "open" => Role::Open,
        "glass" => Role::UnderGlass,
        _ => return Err(RejectCode::BadRole),
    };
    let mode = match str_field(&obj, "mode")? {
        "day" => Mode::Day,
        "night" => Mode::Night,
        _ => return Err(RejectCode::BadMode),
    };
    let lux = num_field(&obj, "lux")?;
    if lux < 0.0 {
        return Err(RejectCode::NegativeLux);
    }
    Ok(Record::Reading(WireRecord {
        node,
        ts,
        role,
        mode,
        lux,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::TimeZone;

    #[test]
    fn canonical_line() {
        let r = parse_record(r#"{"node":"n1","ts":"2024-04-05T12:00:00Z","role":"open","mode":"day","lux":50000}"#).unwrap();
        let Record::Reading(w) = r else { panic!() };
        assert_eq!(w.node, "n1");
        assert_eq!(w.ts, Utc.with_ymd_and_hms(2024, 4, 5, 12, 0, 0).unwrap());
        assert_eq!((w.role, w.mode, w.lux), (Role::Open, Mode::Day, 50000.0));
    }

    #[test]
    fn reason_codes() {
        let code = |l: &str| parse_record(l).unwrap_err().to_string();
        assert_eq!(code(r#"{"node":"n1","ts":"2024-04-05T12:00:00Z","role":"open","mode":"day","lux":-5}"#), "negative_lux");
        assert_eq!(code(r#"{"node":"n1","ts":"2024-04-05T12:00:00Z","mode":"day","lux":5}"#), "missing_field:role");
        assert_eq!(code(r#"{"node":"n1","ts":"yesterday","role":"open","mode":"day","lux":5}"#), "bad_timestamp");
        assert_eq!(code(r#"{"node":"n1","ts":"2024-04-05T12:00:00Z","role":"roof","mode":"day","lux":5}"#), "bad_role");
        assert_eq!(code(r#"{"node":"n1","ts":"2024-04-05T12:00:00Z","role":"open","mode":"dusk","lux":5}"#), "bad_mode");
        assert_eq!(code(r#"{"node":"n1","ts":"2024-04-05T12:00:00Z","role":"open","mode":"day","lux":"5"}"#), "bad_type:lux");
        assert_eq!(code(r#"{"node":"","ts":"2024-04-05T12:00:00Z","role":"open","mode":"day","lux":5}"#), "empty_field:node");
        assert_eq!(code(r#"{"node":"n1","ts":"2024-04-05T12:00:00Z","stream":"image_dust"}"#), "missing_field:value");
        assert_eq!(code("{"), "invalid_json");
        assert_eq!(code("[1]"), "not_object");
        assert_eq!(code("   "), "empty_line");
        assert_eq!(code(&"x".repeat(MAX_LINE_BYTES + 1)), "line_too_long");
    }

    #[test]
    fn unknown_fields_ignored_and_offsets_normalised() {
        let r = parse_record(r#"{"fw":"1.2","node":"n1","ts":"2024-04-05T18:00:00+06:00","role":"glass","mode":"night","lux":790.5}"#).unwrap();
        assert_eq!(r.ts(), Utc.with_ymd_and_hms(2024, 4, 5, 12, 0, 0).unwrap());
    }

    #[test]
    fn value_records() {
        let line = r#"{"node":"cam","ts":"2024-04-05T12:00:00Z","stream":"droppings","value":1}"#;
        let Record::Value(v) = parse_record(line).unwrap() else { panic!() };
        assert_eq!(v.stream_name(), "cam/droppings");
        assert_eq!(parse_record(&v.to_line()).unwrap(), Record::Value(v));
    }

    #[test]
    fn to_line_round_trips() {
        let w = WireRecord {
            node: "n9".into(),
            ts: Utc.with_ymd_and_hms(2024, 4, 5, 12, 0, 7).unwrap(),
            role: Role::UnderGlass,
            mode: Mode::Day,
            lux: 45070.25,
        };
        let line = w.to_line();
        assert_eq!(line, r#"{"node":"n9","ts":"2024-04-05T12:00:07Z","role":"glass","mode":"day","lux":45070.25}"#);
        assert_eq!(parse_record(&line).unwrap(), Record::Reading(w));
    }
}

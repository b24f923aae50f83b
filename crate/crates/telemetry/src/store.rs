//! Day-partitioned append-only files under the data directory:
//!
//! ```text
//! raw/YYYY-MM-DD.log       accepted wire lines, verbatim
//! derived/YYYY-MM-DD.csv   ts,node,mode,blockage
//! values/YYYY-MM-DD.csv    ts,node,stream,value
//! deliveries.log           one JSON line per webhook outcome
//! ```
//!
//! Partitions follow the site-local date of each record.

use std::collections::HashMap;
use std::fs::{self, File, OpenOptions};
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use chrono::{DateTime, NaiveDate, Utc};
use chrono_tz::Tz;
use soilsense_core::soiling::{BlockagePoint, Mode};

use crate::wire::{format_ts, ValueRecord};

pub const DERIVED_HEADER: &str = "ts,node,mode,blockage";
pub const VALUES_HEADER: &str = "ts,node,stream,value";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Kind {
    Raw,
    Derived,
    Values,
}

impl Kind {
    fn dir(self) -> &'static str {
        match self {
            Kind::Raw => "raw",
            Kind::Derived => "derived",
            Kind::Values => "values",
        }
    }

    fn ext(self) -> &'static str {
        match self {
            Kind::Raw => "log",
            _ => "csv",
        }
    }

    fn header(self) -> Option<&'static str> {
        match self {
            Kind::Raw => None,
            Kind::Derived => Some(DERIVED_HEADER),
            Kind::Values => Some(VALUES_HEADER),
        }
    }
}

/// Single writer for every partition of one data directory.
#[derive(Debug)]
pub struct Store {
    root: PathBuf,
    tz: Tz,
    open: HashMap<(Kind, NaiveDate), File>,
}

impl Store {
    pub fn open(root: &Path, tz: Tz) -> io::Result<Self> {
        for k in [Kind::Raw, Kind::Derived, Kind::Values] {
            fs::create_dir_all(root.join(k.dir()))?;
        }
        Ok(Self {
            root: root.to_path_buf(),
            tz,
            open: HashMap::new(),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn raw_dir(&self) -> PathBuf {
        self.root.join(Kind::Raw.dir())
    }

    pub fn derived_dir(&self) -> PathBuf {
        self.root.join(Kind::Derived.dir())
    }

    pub fn deliveries_path(&self) -> PathBuf {
        self.root.join("deliveries.log")
    }

    fn local_date(&self, ts: DateTime<Utc>) -> NaiveDate {
        ts.with_timezone(&self.tz).date_naive()
    }

    fn append(&mut self, kind: Kind, ts: DateTime<Utc>, line: &str) -> io::Result<()> {
        let date = self.local_date(ts);
        if !self.open.contains_key(&(kind, date)) {
            let path = self
                .root
                .join(kind.dir())
                .join(format!("{}.{}", date.format("%Y-%m-%d"), kind.ext()));
            let fresh = !path.exists() || fs::metadata(&path)?.len() == 0;
            let mut f = OpenOptions::new().create(true).append(true).open(&path)?;
            if fresh {
                if let Some(h) = kind.header() {
                    f.write_all(format!("{h}\n").as_bytes())?;
                }
            }
            self.open.insert((kind, date), f);
        }
        let f = self.open.get_mut(&(kind, date)).expect("opened above");
        let mut buf = Vec::with_capacity(line.len() + 1);
        buf.extend_from_slice(line.as_bytes());
        buf.push(b'\n');
        f.write_all(&buf)
    }

    pub fn append_raw(&mut self, ts: DateTime<Utc>, line: &str) -> io::Result<()> {
        self.append(Kind::Raw, ts, line)
    }

    pub fn append_point(&mut self, node: &str, p: &BlockagePoint) -> io::Result<()> {
        let row = format!("{},{},{},{}", format_ts(p.timestamp), node, p.mode, p.blockage);
        self.append(Kind::Derived, p.timestamp, &row)
    }

    pub fn append_value(&mut self, v: &ValueRecord) -> io::Result<()> {
        let row = format!("{},{},{},{}", format_ts(v.ts), v.node, v.stream, v.value);
        self.append(Kind::Values, v.ts, &row)
    }

    pub fn sync(&mut self) -> io::Result<()> {
        for f in self.open.values_mut() {
            f.sync_data()?;
        }
        Ok(())
    }
}

/// Files of one partition directory in date order.
pub fn partitions(dir: &Path, ext: &str) -> io::Result<Vec<PathBuf>> {
    if !dir.exists() {
        return Ok(Vec::new());
    }
    let mut out: Vec<PathBuf> = fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().is_some_and(|x| x == ext))
        .collect();
    out.sort();
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DerivedRow {
    pub ts: DateTime<Utc>,
    pub node: String,
    pub mode: Mode,
    pub blockage: f64,
}

impl DerivedRow {
    pub fn to_point(&self) -> BlockagePoint {
        BlockagePoint {
            timestamp: self.ts,
            blockage: self.blockage,
            mode: self.mode,
            reference_lux: f64::NAN,
            measured_lux: f64::NAN,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum DerivedError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: io::Error,
    },
    #[error("{path}:{line}: {reason}")]
    Row {
        path: PathBuf,
        line: usize,
        reason: String,
    },
}

pub fn parse_derived(text: &str, path: &Path) -> Result<Vec<DerivedRow>, DerivedError> {
    let row_err = |line: usize, reason: String| DerivedError::Row {
        path: path.to_path_buf(),
        line,
        reason,
    };
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() || (i == 0 && line.trim() == DERIVED_HEADER) {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        let [ts, node, mode, b] = f[..] else {
            return Err(row_err(i + 1, format!("expected 4 fields, found {}", f.len())));
        };
        let ts = DateTime::parse_from_rfc3339(ts)
            .map_err(|e| row_err(i + 1, format!("timestamp: {e}")))?
            .with_timezone(&Utc);
        let mode: Mode = mode
            .parse()
            .map_err(|_| row_err(i + 1, format!("mode {mode:?}")))?;
        let blockage: f64 = b
            .parse()
            .ok()
            .filter(|v: &f64| (0.0..=1.0).contains(v))
            .ok_or_else(|| row_err(i + 1, format!("blockage {b:?}")))?;
        rows.push(DerivedRow {
            ts,
            node: node.to_string(),
            mode,
            blockage,
        });
    }
    Ok(rows)
}

/// All rows of a derived file, or of every partition in a derived directory
/// (or a data directory containing `derived/`).
pub fn read_derived(path: &Path) -> Result<Vec<DerivedRow>, DerivedError> {
    let io_err = |p: &Path| {
        let p = p.to_path_buf();
        move |source| DerivedError::Io { path: p, source }
    };
    let files = if path.is_dir() {
        let dir = if path.join("derived").is_dir() {
            path.join("derived")
        } else {
            path.to_path_buf()
        };
        partitions(&dir, "csv").map_err(io_err(&dir))?
    } else {
        vec![path.to_path_buf()]
    };
    let mut rows = Vec::new();
    for f in files {
        let text = fs::read_to_string(&f).map_err(io_err(&f))?;
        rows.extend(parse_derived(&text, &f)?);
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::TimeZone;

    #[test]
    fn partitions_by_local_date_with_headers() {
        let dir = tempfile::tempdir().unwrap();
        let tz: Tz = "Asia/Dhaka".parse().unwrap();
        let mut s = Store::open(dir.path(), tz).unwrap();
        // 19:00 UTC is 01:00 next day in Dhaka
        let t = Utc.with_ymd_and_hms(2024, 4, 5, 19, 0, 0).unwrap();
        let p = BlockagePoint {
            timestamp: t,
            blockage: 0.0986,
            mode: Mode::Night,
            reference_lux: 800.0,
            measured_lux: 721.12,
        };
        s.append_point("n1", &p).unwrap();
        s.append_point("n1", &p).unwrap();
        s.append_raw(t, "{}").unwrap();
        let text = fs::read_to_string(dir.path().join("derived/2024-04-06.csv")).unwrap();
        assert_eq!(text, "ts,node,mode,blockage\n2024-04-05T19:00:00Z,n1,night,0.0986\n2024-04-05T19:00:00Z,n1,night,0.0986\n");
        assert_eq!(fs::read_to_string(dir.path().join("raw/2024-04-06.log")).unwrap(), "{}\n");

        drop(s);
        let mut again = Store::open(dir.path(), tz).unwrap();
        again.append_point("n1", &p).unwrap();
        let rows = read_derived(dir.path()).unwrap();
        assert_eq!(rows.len(), 3);
        assert_eq!(rows[0].blockage, 0.0986);
    }

    #[test]
    fn bad_rows_are_reported() {
        let p = Path::new("x.csv");
        assert!(parse_derived("ts,node,mode,blockage\n2024-04-05T19:00:00Z,n1,day\n", p).is_err());
        assert!(parse_derived("2024-04-05T19:00:00Z,n1,day,1.5\n", p).is_err());
        assert!(parse_derived("", p).unwrap().is_empty());
    }
}

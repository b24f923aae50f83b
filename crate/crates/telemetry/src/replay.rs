use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::TelemetryConfig;
use crate::engine::{Counters, Engine, EngineError};
use crate::store::partitions;

#[derive(Debug, thiserror::Error)]
pub enum ReplayError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("target {0} already holds raw data")]
    TargetNotEmpty(PathBuf),
    #[error(transparent)]
    Engine(#[from] EngineError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ReplayReport {
    pub files: usize,
    pub counters: Counters,
}

/// Raw log files for a source that is a single file, a `raw/` directory, or
/// a data directory.
pub fn raw_files(source: &Path) -> io::Result<Vec<PathBuf>> {
    if source.is_file() {
        return Ok(vec![source.to_path_buf()]);
    }
    let dir = if source.join("raw").is_dir() {
        source.join("raw")
    } else {
        source.to_path_buf()
    };
    partitions(&dir, "log")
}

/// Every line of every raw partition, partitions in date order.
pub fn raw_lines(source: &Path) -> io::Result<Vec<String>> {
    let mut out = Vec::new();
    for f in raw_files(source)? {
        out.extend(fs::read_to_string(&f)?.lines().map(str::to_string));
    }
    Ok(out)
}

/// Rebuilds derived data from raw logs into `cfg.data_dir`, which must not
/// already contain raw data. Alerts are never sent during a replay.
pub fn replay(source: &Path, cfg: &TelemetryConfig) -> Result<ReplayReport, ReplayError> {
    let target_raw = cfg.data_dir.join("raw");
    if partitions(&target_raw, "log")
        .map_err(|source| ReplayError::Io { path: target_raw.clone(), source })?
        .iter()
        .any(|p| fs::metadata(p).map(|m| m.len() > 0).unwrap_or(true))
    {
        return Err(ReplayError::TargetNotEmpty(cfg.data_dir.clone()));
    }
    let files = raw_files(source).map_err(|e| ReplayError::Io {
        path: source.to_path_buf(),
        source: e,
    })?;
    if files.is_empty() && !source.exists() {
        return Err(ReplayError::Io {
            path: source.to_path_buf(),
            source: io::Error::new(io::ErrorKind::NotFound, "no such log"),
        });
    }
    let mut engine = Engine::open(cfg.clone())?;
    engine.set_alerts_enabled(false);
    let io_err = |path: &Path| {
        let path = path.to_path_buf();
        move |source| ReplayError::Io { path, source }
    };
    for f in &files {
        let text = fs::read_to_string(f).map_err(io_err(f))?;
        for line in text.lines() {
            engine.ingest_line(line).map_err(io_err(&cfg.data_dir))?;
        }
    }
    engine.flush().map_err(io_err(&cfg.data_dir))?;
    Ok(ReplayReport {
        files: files.len(),
        counters: engine.counters().clone(),
    })
}

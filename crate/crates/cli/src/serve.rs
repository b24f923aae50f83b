use anyhow::Context;
use soilsense_telemetry::{replay as replay_log, run_until_signal, TelemetryConfig};

use crate::args::{Global, ReplayArgs, ServeArgs};

pub fn load_config(g: &Global) -> anyhow::Result<TelemetryConfig> {
    let mut cfg = match &g.config {
        Some(p) => TelemetryConfig::load(p)?,
        None => TelemetryConfig::default(),
    };
    if let Some(d) = &g.data_dir {
        cfg.data_dir = d.clone();
    }
    if let Some(tz) = &g.timezone {
        cfg.timezone = tz.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

pub fn serve(g: &Global, a: &ServeArgs) -> anyhow::Result<()> {
    let mut cfg = load_config(g)?;
    if let Some(h) = &a.http {
        cfg.http_bind = h.clone();
    }
    if a.no_tcp {
        cfg.tcp_bind = None;
    } else if let Some(t) = &a.tcp {
        cfg.tcp_bind = Some(t.clone());
    }
    if let Some(r) = &a.rules {
        cfg.rules_file = Some(r.clone());
    }
    let rt = tokio::runtime::Runtime::new().context("starting runtime")?;
    let report = rt
        .block_on(run_until_signal(cfg))
        .map_err(|e| anyhow::anyhow!("{e}"))?;
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(())
}

pub fn replay(g: &Global, a: &ReplayArgs) -> anyhow::Result<()> {
    let cfg = load_config(g)?;
    let report = replay_log(&a.source, &cfg)?;
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(())
}

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use anyhow::{bail, Context};
use soilsense_core::sim::{generate_stream, SimScenario, PRESET_NAMES};
use soilsense_telemetry::wire::format_ts;
use soilsense_telemetry::WireRecord;

use crate::args::{Global, SimulateArgs};

/// A preset name, or a path to a scenario TOML file.
pub fn load_scenario(spec: &str) -> anyhow::Result<SimScenario> {
    if PRESET_NAMES.contains(&spec) {
        return Ok(SimScenario::preset(spec)?);
    }
    let path = Path::new(spec);
    if !path.is_file() {
        bail!(
            "unknown scenario {spec:?} (built-ins: {})",
            PRESET_NAMES.join(", ")
        );
    }
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    SimScenario::from_toml(&text).with_context(|| format!("scenario {}", path.display()))
}

pub fn apply_overrides(s: &mut SimScenario, g: &Global) {
    if let Some(seed) = g.seed {
        s.seed = seed;
    }
    if let Some(tz) = &g.timezone {
        s.timezone = tz.clone();
    }
}

pub fn run(g: &Global, a: &SimulateArgs) -> anyhow::Result<()> {
    let mut s = load_scenario(&a.scenario)?;
    apply_overrides(&mut s, g);
    if let Some(i) = a.interval {
        s.sample_interval_s = i;
    }
    let out = generate_stream(&s)?;
    fs::create_dir_all(&a.out).with_context(|| format!("creating {}", a.out.display()))?;

    let mut w = BufWriter::new(fs::File::create(a.out.join("stream.jsonl"))?);
    for r in &out.readings {
        writeln!(w, "{}", WireRecord::from(r).to_line())?;
    }
    w.flush()?;

    let mut truth = csv::Writer::from_path(a.out.join("truth.csv"))?;
    truth.write_record(["ts", "node", "mode", "blockage"])?;
    for t in &out.truth {
        truth.write_record([
            format_ts(t.timestamp),
            s.node_id.clone(),
            t.mode.to_string(),
            t.blockage.to_string(),
        ])?;
    }
    truth.flush()?;

    let mut days = csv::Writer::from_path(a.out.join("days.csv"))?;
    days.write_record(["date", "pm10", "rain_mm", "load", "base_blockage"])?;
    for d in &out.days {
        days.write_record([
            d.date.to_string(),
            d.pm10.to_string(),
            d.rain_mm.to_string(),
            d.state.load.to_string(),
            d.state.base_blockage.to_string(),
        ])?;
    }
    days.flush()?;

    fs::write(a.out.join("scenario.toml"), s.to_toml())?;
    println!(
        "{}: {} days, {} instants, {} readings -> {}",
        s.name,
        out.days.len(),
        out.instants,
        out.readings.len(),
        a.out.display()
    );
    Ok(())
}

use anyhow::{bail, Context};
use chrono::{DateTime, SubsecRound, Utc};
use soilsense_telemetry::ValueRecord;

use crate::args::PostArgs;

pub fn timestamp(a: &PostArgs) -> anyhow::Result<DateTime<Utc>> {
    match &a.ts {
        Some(t) => Ok(DateTime::parse_from_rfc3339(t)
            .map_err(|e| crate::UsageError(format!("--ts {t:?}: {e}")))?
            .with_timezone(&Utc)),
        None => Ok(Utc::now().trunc_subsecs(0)),
    }
}

/// Sends one value to the service's ingest endpoint.
pub fn post_value(a: &PostArgs, base: &str, stream: &str, value: f64) -> anyhow::Result<()> {
    let rec = ValueRecord {
        node: a.node.clone(),
        ts: timestamp(a)?,
        stream: stream.to_string(),
        value,
    };
    let url = format!("{}/ingest", base.trim_end_matches('/'));
    let rt = tokio::runtime::Runtime::new()?;
    let (status, body) = rt.block_on(async {
        let resp = reqwest::Client::new()
            .post(&url)
            .body(rec.to_line())
            .send()
            .await?;
        let status = resp.status();
        Ok::<_, reqwest::Error>((status, resp.text().await?))
    })
    .with_context(|| format!("posting to {url}"))?;
    if !status.is_success() {
        bail!("{url} answered {status}: {body}");
    }
    let v: serde_json::Value = serde_json::from_str(&body).context("ingest response")?;
    if v["accepted"] == 0 && v["duplicates"] == 0 {
        bail!("value rejected: {}", v["rejected"]);
    }
    eprintln!("posted {} = {value} to {url}", rec.stream_name());
    Ok(())
}

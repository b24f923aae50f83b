use std::fs::OpenOptions;
use std::io::Write;
use std::path::PathBuf;
use std::time::Duration;

use serde::Serialize;
use tokio::sync::mpsc;
use tokio::task::JoinSet;

use crate::alerts::Notification;
use crate::config::WebhookPolicy;
use crate::wire::format_ts;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeliveryResult {
    pub rule_id: String,
    pub node: String,
    pub url: String,
    pub attempts: u32,
    pub delivered: bool,
    /// Last HTTP status seen, if any response arrived.
    pub status: Option<u16>,
    pub error: Option<String>,
}

pub fn client(policy: &WebhookPolicy) -> reqwest::Client {
    reqwest::Client::builder()
        .timeout(Duration::from_millis(policy.timeout_ms))
        .build()
        .expect("http client")
}

/// POSTs the notification, retrying on transport errors and non-2xx
/// responses up to `max_attempts` times with doubling waits.
pub async fn deliver(
    client: &reqwest::Client,
    policy: &WebhookPolicy,
    url: &str,
    n: &Notification,
) -> DeliveryResult {
    let body = n.to_json();
    let mut result = DeliveryResult {
        rule_id: n.rule_id.clone(),
        node: n.node.clone(),
        url: url.to_string(),
        attempts: 0,
        delivered: false,
        status: None,
        error: None,
    };
    for attempt in 1..=policy.max_attempts {
        if attempt > 1 {
            tokio::time::sleep(policy.delay_before(attempt)).await;
        }
        result.attempts = attempt;
        let sent = client
            .post(url)
            .header("content-type", "application/json")
            .body(body.clone())
            .send()
            .await;
        match sent {
            Ok(resp) => {
                let status = resp.status();
                result.status = Some(status.as_u16());
                if status.is_success() {
                    result.delivered = true;
                    result.error = None;
                    return result;
                }
                result.error = Some(format!("http {}", status.as_u16()));
            }
            Err(e) => result.error = Some(e.to_string()),
        }
    }
    result
}

/// Background delivery. Notifications are queued without blocking ingest;
/// `shutdown` waits for every queued delivery to finish.
#[derive(Debug)]
pub struct Dispatcher {
    tx: mpsc::UnboundedSender<(String, Notification)>,
    task: tokio::task::JoinHandle<Vec<DeliveryResult>>,
}

impl Dispatcher {
    /// Must be called inside a tokio runtime. Each finished delivery is
    /// appended to `log` as one JSON line.
    pub fn spawn(policy: WebhookPolicy, log: Option<PathBuf>) -> Self {
        let (tx, mut rx) = mpsc::unbounded_channel::<(String, Notification)>();
        let task = tokio::spawn(async move {
            let client = client(&policy);
            let mut running = JoinSet::new();
            let mut done = Vec::new();
            let mut open = true;
            while open || !running.is_empty() {
                tokio::select! {
                    msg = rx.recv(), if open => match msg {
                        Some((url, n)) => {
                            let (c, p) = (client.clone(), policy.clone());
                            running.spawn(async move { deliver(&c, &p, &url, &n).await });
                        }
                        None => open = false,
                    },
                    Some(joined) = running.join_next() => {
                        if let Ok(r) = joined {
                            if let Some(path) = &log {
                                if let Err(e) = append_log(path, &r) {
                                    eprintln!("delivery log {}: {e}", path.display());
                                }
                            }
                            done.push(r);
                        }
                    }
                }
            }
            done
        });
        Self { tx, task }
    }

    pub fn send(&self, url: String, n: Notification) {
        // the receiver only closes after shutdown, which consumes self
        let _ = self.tx.send((url, n));
    }

    pub async fn shutdown(self) -> Vec<DeliveryResult> {
        drop(self.tx);
        self.task.await.unwrap_or_default()
    }
}

fn append_log(path: &PathBuf, r: &DeliveryResult) -> std::io::Result<()> {
    #[derive(Serialize)]
    struct Entry<'a> {
        at: String,
        #[serde(flatten)]
        result: &'a DeliveryResult,
    }
    let line = serde_json::to_string(&Entry {
        at: format_ts(chrono::Utc::now()),
        result: r,
    })
    .expect("delivery entry serialises");
    let mut f = OpenOptions::new().create(true).append(true).open(path)?;
    f.write_all(format!("{line}\n").as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn backoff_doubles_from_base() {
        let p = WebhookPolicy::default();
        assert_eq!(p.delay_before(2), Duration::from_secs(1));
        assert_eq!(p.delay_before(3), Duration::from_secs(2));
        assert_eq!(p.delay_before(4), Duration::from_secs(4));
    }
}

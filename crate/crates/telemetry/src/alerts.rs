use std::collections::HashMap;

use chrono::{DateTime, TimeDelta, Utc};
use serde::{Deserialize, Deserializer, Serialize};
use soilsense_core::soiling::{BlockagePoint, DustLevel, LevelBounds};

fn level_any_case<'de, D: Deserializer<'de>>(d: D) -> Result<DustLevel, D::Error> {
    let s = String::deserialize(d)?;
    s.parse().map_err(serde::de::Error::custom)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlertRule {
    pub rule_id: String,
    /// Node id, or `*` for every node.
    pub node: String,
    #[serde(deserialize_with = "level_any_case")]
    pub level_at_least: DustLevel,
    pub min_interval_s: u64,
    pub webhook_url: String,
}

impl AlertRule {
    pub fn validate(&self) -> Result<(), String> {
        if self.rule_id.is_empty() {
            return Err("rule_id must not be empty".into());
        }
        if self.min_interval_s == 0 {
            return Err(format!("rule {}: min_interval_s must be positive", self.rule_id));
        }
        if !(self.webhook_url.starts_with("http://") || self.webhook_url.starts_with("https://")) {
            return Err(format!("rule {}: webhook_url must be http(s)", self.rule_id));
        }
        Ok(())
    }

    fn applies_to(&self, node: &str) -> bool {
        self.node == "*" || self.node == node
    }
}

/// One rule per non-blank line; `#` starts a comment line.
pub fn parse_rules(text: &str) -> Result<Vec<AlertRule>, String> {
    let mut rules = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let rule: AlertRule =
            serde_json::from_str(line).map_err(|e| format!("rules line {}: {e}", i + 1))?;
        rule.validate()?;
        rules.push(rule);
    }
    Ok(rules)
}

/// Webhook body. Field order is part of the contract.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Notification {
    pub rule_id: String,
    pub node: String,
    pub level: DustLevel,
    pub blockage_pct: f64,
    #[serde(with = "ts_format")]
    pub ts: DateTime<Utc>,
    pub message: String,
}

mod ts_format {
    use chrono::{DateTime, Utc};
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(ts: &DateTime<Utc>, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&crate::wire::format_ts(*ts))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<DateTime<Utc>, D::Error> {
        let s = String::deserialize(d)?;
        DateTime::parse_from_rfc3339(&s)
            .map(|t| t.with_timezone(&Utc))
            .map_err(serde::de::Error::custom)
    }
}

impl Notification {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("notification serialises")
    }
}

/// Rate-limited rule evaluation. Time is the point's own timestamp, so
/// replaying the same points always gives the same notifications.
#[derive(Debug, Clone, Default)]
pub struct AlertEngine {
    rules: Vec<AlertRule>,
    bounds: LevelBounds,
    last_fired: HashMap<String, DateTime<Utc>>,
}

impl AlertEngine {
    pub fn new(rules: Vec<AlertRule>, bounds: LevelBounds) -> Self {
        Self {
            rules,
            bounds,
            last_fired: HashMap::new(),
        }
    }

    pub fn rules(&self) -> &[AlertRule] {
        &self.rules
    }

    pub fn last_fired(&self, rule_id: &str) -> Option<DateTime<Utc>> {
        self.last_fired.get(rule_id).copied()
    }

    pub fn evaluate(&mut self, node: &str, point: &BlockagePoint) -> Vec<Notification> {
        let Ok(level) = self.bounds.classify(point.blockage) else {
            return Vec::new();
        };
        let mut out = Vec::new();
        for rule in &self.rules {
            if !rule.applies_to(node) || level < rule.level_at_least {
                continue;
            }
            let min = TimeDelta::seconds(rule.min_interval_s.min(i64::MAX as u64 / 1000) as i64);
            if let Some(prev) = self.last_fired.get(&rule.rule_id) {
                if point.timestamp - *prev < min {
                    continue;
                }
            }
            self.last_fired.insert(rule.rule_id.clone(), point.timestamp);
            let pct = (point.blockage * 10_000.0).round() / 100.0;
            out.push(Notification {
                rule_id: rule.rule_id.clone(),
                node: node.to_string(),
                level,
                blockage_pct: pct,
                ts: point.timestamp,
                message: format!("{node}: {level} dust, {pct:.2}% of visible light blocked"),
            });
        }
        out
    }
}

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Duration;

use chrono::TimeDelta;
use chrono_tz::Tz;
use serde::{Deserialize, Serialize};
use soilsense_core::soiling::{LevelBounds, DEFAULT_DAY_FLOOR_LUX, DEFAULT_TIMEZONE};

use crate::alerts::{parse_rules, AlertRule};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("reading {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("config: {0}")]
    Parse(String),
    #[error("config: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct WebhookPolicy {
    pub max_attempts: u32,
    /// Wait before attempt n (n >= 2) is base * 2^(n-2).
    pub base_delay_ms: u64,
    pub timeout_ms: u64,
}

impl Default for WebhookPolicy {
    fn default() -> Self {
        Self {
            max_attempts: 3,
            base_delay_ms: 1000,
            timeout_ms: 5000,
        }
    }
}

impl WebhookPolicy {
    pub fn delay_before(&self, attempt: u32) -> Duration {
        Duration::from_millis(self.base_delay_ms << (attempt.saturating_sub(2)).min(20))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TelemetryConfig {
    pub data_dir: PathBuf,
    pub http_bind: String,
    /// Line-protocol listener; off when absent.
    pub tcp_bind: Option<String>,
    pub timezone: String,
    pub pairing_window_s: f64,
    pub day_floor_lux: f64,
    pub level_bounds: LevelBounds,
    /// LED reference per node for night mode.
    pub led_reference_lux: BTreeMap<String, f64>,
    pub default_led_reference_lux: Option<f64>,
    /// JSON lines, one rule each.
    pub rules_file: Option<PathBuf>,
    pub rules: Vec<AlertRule>,
    pub alerts_enabled: bool,
    pub webhook: WebhookPolicy,
}

impl Default for TelemetryConfig {
    fn default() -> Self {
        Self {
            data_dir: PathBuf::from("data"),
            http_bind: "127.0.0.1:8080".into(),
            tcp_bind: Some("127.0.0.1:7070".into()),
            timezone: DEFAULT_TIMEZONE.into(),
            pairing_window_s: 5.0,
            day_floor_lux: DEFAULT_DAY_FLOOR_LUX,
            level_bounds: LevelBounds::default(),
            led_reference_lux: BTreeMap::new(),
            default_led_reference_lux: Some(800.0),
            rules_file: None,
            rules: Vec::new(),
            alerts_enabled: true,
            webhook: WebhookPolicy::default(),
        }
    }
}

impl TelemetryConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let cfg: Self = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml(&text)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.tz()?;
        if !(self.pairing_window_s > 0.0 && self.pairing_window_s.is_finite()) {
            return Err(ConfigError::Invalid("pairing_window_s must be positive".into()));
        }
        if !(self.day_floor_lux.is_finite() && self.day_floor_lux > 0.0) {
            return Err(ConfigError::Invalid("day_floor_lux must be positive".into()));
        }
        if self.webhook.max_attempts == 0 {
            return Err(ConfigError::Invalid("webhook.max_attempts must be at least 1".into()));
        }
        let leds = self.led_reference_lux.values().chain(&self.default_led_reference_lux);
        if leds.into_iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(ConfigError::Invalid("LED references must be positive".into()));
        }
        for r in &self.rules {
            r.validate().map_err(ConfigError::Invalid)?;
        }
        Ok(())
    }

    pub fn tz(&self) -> Result<Tz, ConfigError> {
        self.timezone
            .parse()
            .map_err(|_| ConfigError::Invalid(format!("unknown timezone {:?}", self.timezone)))
    }

    pub fn pairing_window(&self) -> TimeDelta {
        TimeDelta::milliseconds((self.pairing_window_s * 1000.0).round() as i64)
    }

    pub fn led_for(&self, node: &str) -> Option<f64> {
        self.led_reference_lux
            .get(node)
            .copied()
            .or(self.default_led_reference_lux)
    }

    /// Inline rules followed by those in `rules_file`.
    pub fn all_rules(&self) -> Result<Vec<AlertRule>, ConfigError> {
        let mut rules = self.rules.clone();
        if let Some(path) = &self.rules_file {
            let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
                path: path.clone(),
                source,
            })?;
            rules.extend(parse_rules(&text).map_err(ConfigError::Invalid)?);
        }
        Ok(rules)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        TelemetryConfig::default().validate().unwrap();
        assert_eq!(TelemetryConfig::default().pairing_window(), TimeDelta::seconds(5));
    }

    #[test]
    fn toml_overrides() {
        let cfg = TelemetryConfig::from_toml(
            r#"
data_dir = "/tmp/x"
pairing_window_s = 2.5
[led_reference_lux]
n1 = 812.0
[webhook]
base_delay_ms = 10
"#,
        )
        .unwrap();
        assert_eq!(cfg.pairing_window(), TimeDelta::milliseconds(2500));
        assert_eq!(cfg.led_for("n1"), Some(812.0));
        assert_eq!(cfg.led_for("n2"), Some(800.0));
        assert_eq!(cfg.webhook.max_attempts, 3);
        assert!(TelemetryConfig::from_toml("timezone = \"Nowhere\"").is_err());
        assert!(TelemetryConfig::from_toml("pairing_window_s = 0").is_err());
    }

    #[test]
    fn backoff_doubles() {
        let p = WebhookPolicy::default();
        assert_eq!(p.delay_before(2), Duration::from_secs(1));
        assert_eq!(p.delay_before(3), Duration::from_secs(2));
        assert_eq!(p.delay_before(4), Duration::from_secs(4));
    }
}

//! Blockage computation from paired light-sensor readings.
//!
//! All math here works on fractions in `[0, 1]`; percentages only appear at
//! the I/O edges (CSV tables, webhook payloads, CLI output).

mod aggregate;
mod blockage;
mod efficiency;
mod pairing;
mod rain;

use std::fmt;
use std::str::FromStr;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use aggregate::{daily_aggregate, group_by_day, monthly_aggregate, DailySummary, MonthKey};
pub use blockage::{
    blockage_day, blockage_night, classify_dust_level, relative_change, LevelBounds,
    DEFAULT_DAY_FLOOR_LUX,
};
pub use efficiency::{fit_efficiency_model, predict_efficiency_loss, EfficiencyModel};
pub use pairing::{
    pair_readings, PairRejectReason, Pairer, PairingOutcome, ReadingPair, RejectedReading,
    DEFAULT_PAIRING_WINDOW,
};
pub use rain::{natural_cleaning_check, RainRecord, NATURAL_CLEANING_MM};

/// Site timezone used for day boundaries unless configured otherwise.
pub const DEFAULT_TIMEZONE: &str = "Asia/Dhaka";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SoilingError {
    #[error("reference value must be positive, got {0}")]
    NonPositiveReference(f64),
    #[error("open-sensor reading {lux} lux is below the day validity floor of {floor} lux")]
    BelowValidityFloor { lux: f64, floor: f64 },
    #[error("lux must be finite and non-negative, got {0}")]
    InvalidLux(f64),
    #[error("blockage {0} is outside [0, 1]")]
    BlockageOutOfRange(f64),
    #[error("no LED reference calibration stored for node {0:?}")]
    MissingCalibration(String),
    #[error("degenerate fit: {0}")]
    DegenerateFit(&'static str),
    #[error("invalid dust level bounds: {0}")]
    InvalidBounds(&'static str),
}

/// Which physical sensor produced a reading.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    /// Sensor in open air, measuring direct light.
    Open,
    /// Sensor under the exposed glass sample.
    #[serde(rename = "glass")]
    UnderGlass,
}

impl Role {
    pub fn as_str(self) -> &'static str {
        match self {
            Role::Open => "open",
            Role::UnderGlass => "glass",
        }
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Sunlight; open sensor is the reference.
    Day,
    /// LED under the glass; the stored LED lux is the reference.
    Night,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Day => "day",
            Mode::Night => "night",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mode {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "day" => Ok(Mode::Day),
            "night" => Ok(Mode::Night),
            _ => Err(()),
        }
    }
}

/// One illuminance sample from one sensor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LuxReading {
    pub node_id: String,
    pub timestamp: DateTime<Utc>,
    pub role: Role,
    pub mode: Mode,
    pub lux: f64,
}

impl LuxReading {
    pub fn new(
        node_id: impl Into<String>,
        timestamp: DateTime<Utc>,
        role: Role,
        mode: Mode,
        lux: f64,
    ) -> Result<Self, SoilingError> {
        if !lux.is_finite() || lux < 0.0 {
            return Err(SoilingError::InvalidLux(lux));
        }
        Ok(Self {
            node_id: node_id.into(),
            timestamp,
            role,
            mode,
            lux,
        })
    }
}

/// A computed blockage fraction at an instant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockagePoint {
    pub timestamp: DateTime<Utc>,
    pub blockage: f64,
    pub mode: Mode,
    pub reference_lux: f64,
    pub measured_lux: f64,
}

impl BlockagePoint {
    /// Day-mode point from an open/glass pair. Applies the validity floor.
    pub fn day(
        timestamp: DateTime<Utc>,
        open_lux: f64,
        glass_lux: f64,
        floor_lux: f64,
    ) -> Result<Self, SoilingError> {
        let blockage = blockage_day(open_lux, glass_lux, floor_lux)?;
        Ok(Self {
            timestamp,
            blockage,
            mode: Mode::Day,
            reference_lux: open_lux,
            measured_lux: glass_lux,
        })
    }

    pub fn night(
        timestamp: DateTime<Utc>,
        led_reference_lux: Option<f64>,
        measured_lux: f64,
        node_id: &str,
    ) -> Result<Self, SoilingError> {
        let reference = led_reference_lux
            .ok_or_else(|| SoilingError::MissingCalibration(node_id.to_string()))?;
        let blockage = blockage_night(reference, measured_lux)?;
        Ok(Self {
            timestamp,
            blockage,
            mode: Mode::Night,
            reference_lux: reference,
            measured_lux,
        })
    }

    pub fn percent(&self) -> f64 {
        self.blockage * 100.0
    }
}

/// Dust accumulation level derived from a blockage fraction.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize,
)]
pub enum DustLevel {
    Low,
    Moderate,
    High,
    Severe,
}

impl DustLevel {
    pub const ALL: [DustLevel; 4] = [
        DustLevel::Low,
        DustLevel::Moderate,
        DustLevel::High,
        DustLevel::Severe,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            DustLevel::Low => "Low",
            DustLevel::Moderate => "Moderate",
            DustLevel::High => "High",
            DustLevel::Severe => "Severe",
        }
    }
}

impl fmt::Display for DustLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DustLevel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        DustLevel::ALL
            .into_iter()
            .find(|l| l.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown dust level {s:?}"))
    }
}

use std::f64::consts::PI;

use chrono::{Datelike, NaiveDate};
use chrono_tz::Tz;
use serde::{Deserialize, Serialize};

use super::{AngleModel, DepositionParams, SimError};
use crate::soiling::DEFAULT_DAY_FLOOR_LUX;

pub const PRESET_NAMES: [&str; 4] = ["march-33d", "april-month", "june-rain", "six-month"];

/// A seeded environment run. Series are per local day, first entry = start_date.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimScenario {
    pub name: String,
    pub seed: u64,
    #[serde(default = "default_node")]
    pub node_id: String,
    pub latitude: f64,
    #[serde(default = "default_longitude")]
    pub longitude: f64,
    #[serde(default = "default_timezone")]
    pub timezone: String,
    pub start_date: NaiveDate,
    pub end_date: NaiveDate,
    pub pm10_series: Vec<f64>,
    pub rain_series: Vec<f64>,
    #[serde(default = "default_clean_max")]
    pub clean_max_lux: f64,
    #[serde(default = "default_led")]
    pub led_reference_lux: f64,
    #[serde(default = "default_interval")]
    pub sample_interval_s: u32,
    /// Half-width of the uniform multiplicative sensor noise.
    #[serde(default = "default_noise")]
    pub noise: f64,
    #[serde(default = "default_floor")]
    pub day_floor_lux: f64,
    /// Clear-sky multiplier on days with any rain.
    #[serde(default = "default_rain_cloud")]
    pub rain_cloud_factor: f64,
    #[serde(default)]
    pub deposition: DepositionParams,
    #[serde(default)]
    pub angle: AngleModel,
}

fn default_node() -> String {
    "sim-1".into()
}
fn default_longitude() -> f64 {
    90.41
}
fn default_timezone() -> String {
    crate::soiling::DEFAULT_TIMEZONE.into()
}
fn default_clean_max() -> f64 {
    super::DEFAULT_CLEAN_MAX_LUX
}
fn default_led() -> f64 {
    800.0
}
fn default_interval() -> u32 {
    60
}
fn default_noise() -> f64 {
    0.02
}
fn default_floor() -> f64 {
    DEFAULT_DAY_FLOOR_LUX
}
fn default_rain_cloud() -> f64 {
    0.55
}

fn date(y: i32, m: u32, d: u32) -> NaiveDate {
    NaiveDate::from_ymd_opt(y, m, d).expect("preset date")
}

fn runs(parts: &[(f64, usize)]) -> Vec<f64> {
    parts
        .iter()
        .flat_map(|&(v, n)| std::iter::repeat_n(v, n))
        .collect()
}

fn rain_days(n: usize, days: &[(usize, f64)]) -> Vec<f64> {
    let mut out = vec![0.0; n];
    for &(d, mm) in days {
        out[d - 1] = mm;
    }
    out
}

impl SimScenario {
    /// Dry, dust-free scenario with every other field at its default.
    pub fn base(name: &str, seed: u64, start_date: NaiveDate, days: usize) -> Self {
        Self {
            name: name.to_string(),
            seed,
            node_id: default_node(),
            latitude: 23.98,
            longitude: default_longitude(),
            timezone: default_timezone(),
            start_date,
            end_date: start_date + chrono::Days::new(days.saturating_sub(1) as u64),
            pm10_series: vec![0.0; days],
            rain_series: vec![0.0; days],
            clean_max_lux: default_clean_max(),
            led_reference_lux: default_led(),
            sample_interval_s: default_interval(),
            noise: default_noise(),
            day_floor_lux: default_floor(),
            rain_cloud_factor: default_rain_cloud(),
            deposition: DepositionParams::default(),
            angle: AngleModel::default(),
        }
    }

    pub fn preset(name: &str) -> Result<Self, SimError> {
        let s = match name {
            "april-month" => {
                let mut s = Self::base(name, 20240401, date(2024, 4, 1), 30);
                s.pm10_series = runs(&[(100.0, 7), (140.0, 8), (110.0, 15)]);
                s
            }
            "march-33d" => {
                let mut s = Self::base(name, 20240301, date(2024, 3, 1), 33);
                s.pm10_series = runs(&[(160.0, 1), (126.0, 19), (112.0, 13)]);
                s
            }
            "june-rain" => {
                let mut s = Self::base(name, 20240601, date(2024, 6, 1), 30);
                s.pm10_series = runs(&[(47.0, 2), (42.0, 17), (28.0, 11)]);
                s.rain_series = rain_days(
                    30,
                    &[
                        // heavy
                        (3, 34.0),
                        (5, 28.0),
                        (6, 51.0),
                        (8, 30.0),
                        (9, 26.0),
                        (11, 36.0),
                        (14, 27.0),
                        // moderate
                        (4, 9.0),
                        (7, 8.0),
                        (10, 7.0),
                        (12, 9.0),
                        (13, 6.0),
                        // light showers after the dry gap
                        (20, 7.0),
                        (22, 6.0),
                        (24, 8.0),
                        (26, 5.0),
                        (28, 6.0),
                    ],
                );
                s
            }
            "six-month" => six_month(),
            other => return Err(SimError::UnknownPreset(other.to_string())),
        };
        Ok(s)
    }

    pub fn from_toml(text: &str) -> Result<Self, SimError> {
        let s: Self = toml::from_str(text).map_err(|e| SimError::Parse(e.to_string()))?;
        s.validate()?;
        Ok(s)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario serialises")
    }

    pub fn days(&self) -> usize {
        (self.end_date - self.start_date).num_days() as usize + 1
    }

    pub fn tz(&self) -> Result<Tz, SimError> {
        self.timezone
            .parse::<Tz>()
            .map_err(|_| SimError::InvalidScenario(format!("unknown timezone {:?}", self.timezone)))
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |m: String| Err(SimError::InvalidScenario(m));
        if self.end_date < self.start_date {
            return bad("end_date precedes start_date".into());
        }
        let n = self.days();
        if self.pm10_series.len() != n || self.rain_series.len() != n {
            return bad(format!(
                "series must cover {n} days (pm10 has {}, rain has {})",
                self.pm10_series.len(),
                self.rain_series.len()
            ));
        }
        if self.pm10_series.iter().chain(&self.rain_series).any(|v| !v.is_finite() || *v < 0.0) {
            return bad("pm10 and rain values must be finite and non-negative".into());
        }
        if !(self.clean_max_lux > 0.0 && self.led_reference_lux > 0.0) {
            return bad("clean_max_lux and led_reference_lux must be positive".into());
        }
        if self.sample_interval_s == 0 || 86_400 % self.sample_interval_s != 0 {
            return bad("sample_interval_s must divide 86400".into());
        }
        if !(0.0..1.0).contains(&self.noise) {
            return bad("noise must be in [0, 1)".into());
        }
        if !(self.rain_cloud_factor > 0.0 && self.rain_cloud_factor <= 1.0) {
            return bad("rain_cloud_factor must be in (0, 1]".into());
        }
        let d = &self.deposition;
        if !(d.k >= 0.0 && d.beta > 0.0 && d.b_max > 0.0 && d.b_max <= 1.0 && d.gamma >= 0.0) {
            return bad("deposition parameters out of range".into());
        }
        if !(-90.0..=90.0).contains(&self.latitude) {
            return bad("latitude out of range".into());
        }
        self.tz()?;
        Ok(())
    }
}

fn six_month() -> SimScenario {
    const LEVELS: [f64; 6] = [520.0, 230.0, 135.0, 120.0, 75.0, 45.0];
    let rains: [&[(u32, f64)]; 6] = [
        &[],
        &[(9, 22.0), (22, 21.0)],
        &[(12, 8.0), (21, 24.0)],
        &[(8, 22.0), (24, 21.0)],
        &[(4, 22.0), (9, 12.0), (13, 24.0), (18, 22.0), (24, 25.0), (29, 12.0)],
        &[(4, 22.0), (9, 10.0), (14, 24.0), (19, 12.0), (23, 22.0), (28, 10.0)],
    ];
    let start = date(2024, 1, 1);
    let end = date(2024, 6, 30);
    let mut s = SimScenario::base("six-month", 20240101, start, 0);
    s.end_date = end;
    s.pm10_series.clear();
    s.rain_series.clear();
    let mut d = start;
    while d <= end {
        let mi = d.month0() as usize;
        let day = d.day() as f64;
        // mild weekly-ish swing around each month's level
        s.pm10_series
            .push(LEVELS[mi] * (1.0 + 0.15 * (2.0 * PI * (day + 3.0 * mi as f64) / 6.3).sin()));
        let mm = rains[mi].iter().find(|(rd, _)| *rd == d.day()).map_or(0.0, |r| r.1);
        s.rain_series.push(mm);
        d = d.succ_opt().expect("date in range");
    }
    s.deposition.beta = 2.7085040413265906;
    s.deposition.b_max = 0.3469234151088663;
    s
}

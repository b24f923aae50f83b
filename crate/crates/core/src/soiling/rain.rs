use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

/// Rain total over the window that washes a panel clean on its own.
pub const NATURAL_CLEANING_MM: f64 = 20.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RainRecord {
    pub date: NaiveDate,
    pub rain_mm: f64,
}

/// True when the rain summed over the last `window_days` calendar days
/// (ending at the most recent record) reaches the natural-cleaning amount.
pub fn natural_cleaning_check(recent_rain: &[RainRecord], window_days: u32) -> bool {
    let Some(latest) = recent_rain.iter().map(|r| r.date).max() else {
        return false;
    };
    if window_days == 0 {
        return false;
    }
    let first = latest - chrono::Days::new(u64::from(window_days) - 1);
    let total: f64 = recent_rain
        .iter()
        .filter(|r| r.date >= first && r.rain_mm.is_finite() && r.rain_mm > 0.0)
        .map(|r| r.rain_mm)
        .sum();
    total >= NATURAL_CLEANING_MM
}

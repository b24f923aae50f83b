use std::collections::BTreeMap;

use chrono::{Datelike, NaiveDate};
use chrono_tz::Tz;
use serde::{Deserialize, Serialize};

use super::BlockagePoint;

/// Per-day statistics of blockage fractions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DailySummary {
    pub date: NaiveDate,
    pub mean_blockage: f64,
    pub peak_blockage: f64,
    pub min_blockage: f64,
    pub sample_count: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct MonthKey {
    pub year: i32,
    pub month: u32,
}

impl MonthKey {
    pub fn of(date: NaiveDate) -> Self {
        Self {
            year: date.year(),
            month: date.month(),
        }
    }
}

impl std::fmt::Display for MonthKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:04}-{:02}", self.year, self.month)
    }
}

/// Plain arithmetic mean, max and min over the day's points.
///
/// Returns `None` when there is no data for the day.
pub fn daily_aggregate(points: &[BlockagePoint], date: NaiveDate) -> Option<DailySummary> {
    if points.is_empty() {
        return None;
    }
    let mut sum = 0.0;
    let mut peak = f64::NEG_INFINITY;
    let mut min = f64::INFINITY;
    for p in points {
        sum += p.blockage;
        peak = peak.max(p.blockage);
        min = min.min(p.blockage);
    }
    let mean = (sum / points.len() as f64).clamp(min, peak);
    Some(DailySummary {
        date,
        mean_blockage: mean,
        peak_blockage: peak,
        min_blockage: min,
        sample_count: points.len(),
    })
}

/// Mean of daily means weighted by sample count. `None` for an empty month.
pub fn monthly_aggregate(summaries: &[DailySummary]) -> Option<f64> {
    let n: usize = summaries.iter().map(|s| s.sample_count).sum();
    if n == 0 {
        return None;
    }
    let weighted: f64 = summaries
        .iter()
        .map(|s| s.mean_blockage * s.sample_count as f64)
        .sum();
    Some(weighted / n as f64)
}

/// Bucket points by local calendar date in the site timezone.
pub fn group_by_day<'a, I>(points: I, tz: Tz) -> BTreeMap<NaiveDate, Vec<BlockagePoint>>
where
    I: IntoIterator<Item = &'a BlockagePoint>,
{
    let mut out: BTreeMap<NaiveDate, Vec<BlockagePoint>> = BTreeMap::new();
    for p in points {
        let date = p.timestamp.with_timezone(&tz).date_naive();
        out.entry(date).or_default().push(p.clone());
    }
    out
}

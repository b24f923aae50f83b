use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;

use anyhow::Context;
use chrono::NaiveDate;
use chrono_tz::Tz;
use soilsense_core::soiling::{
    classify_dust_level, daily_aggregate, group_by_day, monthly_aggregate, BlockagePoint,
    DailySummary, MonthKey,
};
use soilsense_telemetry::store::read_derived;

use crate::args::{AnalyzeArgs, Global, Period};
use crate::svg::{line_chart, Series};

pub struct Bundle {
    /// node -> daily summaries in date order
    pub daily: BTreeMap<String, Vec<DailySummary>>,
    /// node -> month -> (weighted mean, days, samples)
    pub monthly: BTreeMap<String, BTreeMap<MonthKey, (f64, usize, usize)>>,
}

pub fn site_tz(g: &Global) -> anyhow::Result<Tz> {
    let name = match (&g.timezone, &g.config) {
        (Some(tz), _) => tz.clone(),
        (None, Some(_)) => crate::serve::load_config(g)?.timezone,
        (None, None) => soilsense_core::soiling::DEFAULT_TIMEZONE.to_string(),
    };
    name.parse()
        .map_err(|_| anyhow::anyhow!("unknown timezone {name:?}"))
}

pub fn build(points: BTreeMap<String, Vec<BlockagePoint>>, tz: Tz, from: Option<NaiveDate>, to: Option<NaiveDate>) -> Bundle {
    let mut daily = BTreeMap::new();
    let mut monthly = BTreeMap::new();
    for (node, pts) in points {
        let days: Vec<DailySummary> = group_by_day(&pts, tz)
            .into_iter()
            .filter(|(d, _)| from.is_none_or(|f| *d >= f) && to.is_none_or(|t| *d <= t))
            .filter_map(|(d, p)| daily_aggregate(&p, d))
            .collect();
        let mut by_month: BTreeMap<MonthKey, Vec<DailySummary>> = BTreeMap::new();
        for d in &days {
            by_month.entry(MonthKey::of(d.date)).or_default().push(d.clone());
        }
        let months = by_month
            .into_iter()
            .filter_map(|(m, ds)| {
                let samples = ds.iter().map(|d| d.sample_count).sum();
                monthly_aggregate(&ds).map(|mean| (m, (mean, ds.len(), samples)))
            })
            .collect();
        daily.insert(node.clone(), days);
        monthly.insert(node, months);
    }
    Bundle { daily, monthly }
}

pub fn run(g: &Global, a: &AnalyzeArgs) -> anyhow::Result<()> {
    let tz = site_tz(g)?;
    if !a.derived.exists() {
        anyhow::bail!("{}: no such file or directory", a.derived.display());
    }
    let rows = read_derived(&a.derived)?;
    let mut points: BTreeMap<String, Vec<BlockagePoint>> = BTreeMap::new();
    for r in rows {
        if a.node.as_ref().is_some_and(|n| *n != r.node) {
            continue;
        }
        points.entry(r.node.clone()).or_default().push(r.to_point());
    }
    let bundle = build(points, tz, a.from, a.to);
    fs::create_dir_all(&a.out).with_context(|| format!("creating {}", a.out.display()))?;

    if matches!(a.period, Period::Daily | Period::All) {
        let mut w = csv::Writer::from_path(a.out.join("daily.csv"))?;
        w.write_record(["date", "node", "mean_blockage", "peak_blockage", "min_blockage", "samples"])?;
        for (node, days) in &bundle.daily {
            for d in days {
                w.write_record([
                    d.date.to_string(),
                    node.clone(),
                    d.mean_blockage.to_string(),
                    d.peak_blockage.to_string(),
                    d.min_blockage.to_string(),
                    d.sample_count.to_string(),
                ])?;
            }
        }
        w.flush()?;
        fs::write(a.out.join("daily.svg"), daily_chart(&bundle))?;
    }
    if matches!(a.period, Period::Monthly | Period::All) {
        let mut w = csv::Writer::from_path(a.out.join("monthly.csv"))?;
        w.write_record(["month", "node", "mean_blockage", "days", "samples"])?;
        for (node, months) in &bundle.monthly {
            for (m, (mean, days, samples)) in months {
                w.write_record([
                    m.to_string(),
                    node.clone(),
                    mean.to_string(),
                    days.to_string(),
                    samples.to_string(),
                ])?;
            }
        }
        w.flush()?;
        fs::write(a.out.join("monthly.svg"), monthly_chart(&bundle))?;
    }
    let summary = summary(&bundle);
    fs::write(a.out.join("summary.txt"), &summary)?;
    print!("{summary}");
    Ok(())
}

fn daily_chart(b: &Bundle) -> String {
    let mut dates: Vec<NaiveDate> = b.daily.values().flatten().map(|d| d.date).collect();
    dates.sort();
    dates.dedup();
    let index: BTreeMap<NaiveDate, usize> = dates.iter().enumerate().map(|(i, d)| (*d, i)).collect();
    let series: Vec<Series> = b
        .daily
        .iter()
        .map(|(node, days)| Series {
            name: node.clone(),
            points: days
                .iter()
                .map(|d| (index[&d.date] as f64, d.mean_blockage * 100.0))
                .collect(),
        })
        .collect();
    let ticks: Vec<String> = dates.iter().map(|d| d.format("%m-%d").to_string()).collect();
    line_chart("Daily mean blockage", "blockage (%)", &ticks, &series)
}

fn monthly_chart(b: &Bundle) -> String {
    let mut months: Vec<MonthKey> = b.monthly.values().flat_map(|m| m.keys().copied()).collect();
    months.sort();
    months.dedup();
    let index: BTreeMap<MonthKey, usize> = months.iter().enumerate().map(|(i, m)| (*m, i)).collect();
    let series: Vec<Series> = b
        .monthly
        .iter()
        .map(|(node, ms)| Series {
            name: node.clone(),
            points: ms.iter().map(|(m, v)| (index[m] as f64, v.0 * 100.0)).collect(),
        })
        .collect();
    let ticks: Vec<String> = months.iter().map(|m| m.to_string()).collect();
    line_chart("Monthly mean blockage", "blockage (%)", &ticks, &series)
}

fn summary(b: &Bundle) -> String {
    let mut s = String::new();
    let all: Vec<&DailySummary> = b.daily.values().flatten().collect();
    let samples: usize = all.iter().map(|d| d.sample_count).sum();
    let _ = writeln!(s, "nodes: {}", b.daily.len());
    let _ = writeln!(s, "days: {}", all.len());
    let _ = writeln!(s, "points: {samples}");
    for (node, days) in &b.daily {
        let Some(mean) = monthly_aggregate(days) else {
            continue;
        };
        let n: usize = days.iter().map(|d| d.sample_count).sum();
        let peak = days
            .iter()
            .max_by(|x, y| x.mean_blockage.total_cmp(&y.mean_blockage))
            .expect("non-empty");
        let last = days.last().expect("non-empty");
        let level = classify_dust_level(last.mean_blockage).map(|l| l.to_string()).unwrap_or_default();
        let _ = writeln!(
            s,
            "node {node}: {} to {}, {} days, {n} points, mean {:.2}%, highest day {} at {:.2}%, last day {:.2}% ({level})",
            days[0].date,
            last.date,
            days.len(),
            mean * 100.0,
            peak.date,
            peak.mean_blockage * 100.0,
            last.mean_blockage * 100.0,
        );
        for (m, (mm, nd, ns)) in &b.monthly[node] {
            let _ = writeln!(s, "  {m}: mean {:.2}% over {nd} days, {ns} points", mm * 100.0);
        }
    }
    s
}

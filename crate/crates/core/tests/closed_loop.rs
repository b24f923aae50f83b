use std::collections::BTreeMap;

use chrono::NaiveDate;
use soilsense_core::sim::{generate_stream, recover_points, SimScenario, PRESET_NAMES};
use soilsense_core::soiling::{group_by_day, Mode, DEFAULT_PAIRING_WINDOW};

fn daily_means(s: &SimScenario) -> (BTreeMap<NaiveDate, f64>, BTreeMap<NaiveDate, f64>) {
    let out = generate_stream(s).unwrap();
    let tz = s.tz().unwrap();
    let pts = recover_points(&out.readings, DEFAULT_PAIRING_WINDOW, s.day_floor_lux, Some(s.led_reference_lux));
    let day_pts: Vec<_> = pts.into_iter().filter(|p| p.mode == Mode::Day).collect();
    let recovered = group_by_day(day_pts.iter(), tz)
        .into_iter()
        .map(|(d, v)| (d, v.iter().map(|p| p.blockage).sum::<f64>() / v.len() as f64))
        .collect();
    let mut truth: BTreeMap<NaiveDate, (f64, usize)> = BTreeMap::new();
    for t in out.truth.iter().filter(|t| t.mode == Mode::Day) {
        let e = truth.entry(t.timestamp.with_timezone(&tz).date_naive()).or_default();
        e.0 += t.blockage;
        e.1 += 1;
    }
    (recovered, truth.into_iter().map(|(d, (s, n))| (d, s / n as f64)).collect())
}

#[test]
fn recovered_daily_means_track_truth() {
    for name in PRESET_NAMES {
        for seed in [1u64, 2, 3] {
            let mut s = SimScenario::preset(name).unwrap();
            s.seed = seed;
            let (rec, truth) = daily_means(&s);
            assert_eq!(rec.len(), s.days(), "{name}");
            for (d, t) in &truth {
                let r = rec[d];
                assert!((r - t).abs() <= 0.01, "{name} seed {seed} {d}: recovered {r} truth {t}");
            }
        }
    }
}

#[test]
fn night_readings_recover_base() {
    let s = SimScenario::preset("april-month").unwrap();
    let out = generate_stream(&s).unwrap();
    let pts = recover_points(&out.readings, DEFAULT_PAIRING_WINDOW, s.day_floor_lux, Some(s.led_reference_lux));
    let nights: Vec<_> = pts.iter().filter(|p| p.mode == Mode::Night).collect();
    assert_eq!(nights.len(), s.days());
    for (n, day) in nights.iter().zip(&out.days) {
        assert!((n.blockage - day.state.base_blockage).abs() <= 0.021, "{} vs {}", n.blockage, day.state.base_blockage);
    }
}

use soilsense_core::sim::{daily_trajectory, rain_wash, DepositionParams, DustState, SimScenario};

fn base_pct(name: &str) -> Vec<f64> {
    let s = SimScenario::preset(name).unwrap();
    daily_trajectory(&s.pm10_series, &s.rain_series, &s.deposition)
        .iter()
        .map(|d| d.base_blockage * 100.0)
        .collect()
}

#[test]
fn april_month_anchors() {
    let b = base_pct("april-month");
    assert!((b[6] - 8.44).abs() <= 1.0, "{}", b[6]);
    assert!((b[14] - 19.05).abs() <= 1.5, "{}", b[14]);
    assert!((b[29] - 31.0).abs() <= 2.0, "{}", b[29]);
}

#[test]
fn march_anchors() {
    let b = base_pct("march-33d");
    for (day, want) in [(1, 2.0), (20, 25.0), (33, 34.0)] {
        assert!((b[day - 1] - want).abs() <= 2.0, "day {day}: {}", b[day - 1]);
    }
}

#[test]
fn june_rain_stays_low() {
    let b = base_pct("june-rain");
    assert!(b.iter().all(|&x| x <= 3.0), "{b:?}");
    // dry gap after the last heavy rain on day 14
    let gap_peak = b[14..19].iter().cloned().fold(0.0, f64::max);
    assert!((gap_peak - 2.6).abs() <= 1.0, "{gap_peak}");
    assert!((b[1] - 1.2).abs() <= 1.0);
}

#[test]
fn six_month_ordering() {
    let b = base_pct("six-month");
    let mut means = Vec::new();
    let mut i = 0;
    for n in [31, 29, 31, 30, 31, 30] {
        means.push(b[i..i + n].iter().sum::<f64>() / n as f64);
        i += n;
    }
    for (m, want) in means.iter().zip([35.0, 33.0, 33.0, 31.0, 21.0, 18.0]) {
        assert!((m - want).abs() <= 3.0, "{means:?}");
    }
    assert!(means[0] >= means[1] && means[2] >= means[3] && means[3] > means[4] && means[4] > means[5]);
}

#[test]
fn heavy_rain_removes_nearly_all_load() {
    let p = DepositionParams::default();
    let s = DustState::with_load(7.3, &p);
    assert!(rain_wash(s, 20.0, &p).load <= 0.02 * s.load + 1e-15);
}

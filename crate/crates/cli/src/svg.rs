use std::fmt::Write;

const W: f64 = 800.0;
const H: f64 = 400.0;
const LEFT: f64 = 60.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 50.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"];

pub struct Series {
    pub name: String,
    /// (x index, y value)
    pub points: Vec<(f64, f64)>,
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Line chart over integer x positions with text tick labels. y starts at 0.
pub fn line_chart(title: &str, y_label: &str, x_ticks: &[String], series: &[Series]) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="22" text-anchor="middle" font-size="14">{}</text>"#,
        W / 2.0,
        esc(title)
    );
    let pw = W - LEFT - RIGHT;
    let ph = H - TOP - BOTTOM;
    let ymax_data = series
        .iter()
        .flat_map(|s| s.points.iter().map(|p| p.1))
        .fold(0.0_f64, f64::max);
    // round up to a multiple of 5
    let ymax = ((ymax_data / 5.0).ceil() * 5.0).max(5.0);
    let n = x_ticks.len().max(2) as f64;
    let sx = |x: f64| LEFT + pw * x / (n - 1.0);
    let sy = |y: f64| TOP + ph * (1.0 - y / ymax);

    let _ = writeln!(
        s,
        r#"<g stroke="black" fill="none"><line x1="{LEFT}" y1="{TOP}" x2="{LEFT}" y2="{b}"/><line x1="{LEFT}" y1="{b}" x2="{r}" y2="{b}"/></g>"#,
        b = TOP + ph,
        r = LEFT + pw
    );
    for k in 0..=5 {
        let v = ymax * k as f64 / 5.0;
        let y = sy(v);
        let _ = writeln!(
            s,
            r##"<line x1="{LEFT}" y1="{y:.1}" x2="{r}" y2="{y:.1}" stroke="#ddd"/><text x="{tx}" y="{ty:.1}" text-anchor="end">{v}</text>"##,
            r = LEFT + pw,
            tx = LEFT - 6.0,
            ty = y + 4.0,
        );
    }
    let step = (x_ticks.len() / 10).max(1);
    for (i, label) in x_ticks.iter().enumerate().step_by(step) {
        let x = sx(i as f64);
        let _ = writeln!(
            s,
            r#"<text x="{x:.1}" y="{y}" text-anchor="middle">{}</text>"#,
            esc(label),
            y = TOP + ph + 18.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="16" y="{y}" transform="rotate(-90 16 {y})" text-anchor="middle">{}</text>"#,
        esc(y_label),
        y = TOP + ph / 2.0
    );
    if series.iter().all(|s| s.points.is_empty()) {
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="middle" fill="gray">no data</text>"#,
            W / 2.0,
            H / 2.0
        );
    }
    for (k, ser) in series.iter().enumerate() {
        let color = COLORS[k % COLORS.len()];
        let pts: Vec<String> = ser
            .points
            .iter()
            .map(|&(x, y)| format!("{:.1},{:.1}", sx(x), sy(y)))
            .collect();
        if pts.len() > 1 {
            let _ = writeln!(
                s,
                r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
                pts.join(" ")
            );
        }
        for p in &pts {
            let (x, y) = p.split_once(',').expect("formatted above");
            let _ = writeln!(s, r#"<circle cx="{x}" cy="{y}" r="2" fill="{color}"/>"#);
        }
        let ly = TOP + 14.0 * k as f64;
        let _ = writeln!(
            s,
            r#"<text x="{x}" y="{ly}" fill="{color}" text-anchor="end">{}</text>"#,
            esc(&ser.name),
            x = LEFT + pw - 4.0,
        );
    }
    s.push_str("</svg>\n");
    s
}

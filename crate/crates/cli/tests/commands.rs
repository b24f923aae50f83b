mod common;

use std::fs;

use common::{data, http, run, speckled, stderr, stdout, write_pgm, Served};

#[test]
fn usage_errors_exit_1() {
    assert_eq!(run(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(run(&["simulate"]).status.code(), Some(1));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn simulate_is_deterministic_and_sized() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let p = |n: &str| d.join(n).to_str().unwrap().to_string();
    for (out, seed) in [("a", "7"), ("b", "7"), ("c", "8")] {
        let o = run(&["--seed", seed, "simulate", "april-month", "--interval", "300", "--out", &p(out)]);
        assert!(o.status.success(), "{}", stderr(&o));
    }
    let read = |n: &str| fs::read(d.join(n).join("stream.jsonl")).unwrap();
    assert_eq!(read("a"), read("b"));
    assert_ne!(read("a"), read("c"));
    assert_eq!(fs::read(d.join("a/truth.csv")).unwrap(), fs::read(d.join("b/truth.csv")).unwrap());

    // two sensors per instant plus one LED reading per night
    let instants = 30 * 86_400 / 300;
    let lines = String::from_utf8(read("a")).unwrap().lines().count();
    assert_eq!(lines, 2 * instants + 30);

    let bad = run(&["simulate", "no-such-scenario", "--out", &p("x")]);
    assert_eq!(bad.status.code(), Some(2));
    assert!(stderr(&bad).contains("unknown scenario"));
}

fn derived(dir: &std::path::Path, rows: &[(&str, f64)]) -> std::path::PathBuf {
    let path = dir.join("points.csv");
    let mut text = String::from("ts,node,mode,blockage\n");
    for (ts, b) in rows {
        text.push_str(&format!("{ts},n1,day,{b}\n"));
    }
    fs::write(&path, text).unwrap();
    path
}

#[test]
fn analyze_empty_and_constant_logs() {
    let dir = tempfile::tempdir().unwrap();
    let empty = derived(dir.path(), &[]);
    let out = dir.path().join("empty");
    let o = run(&["analyze", empty.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(fs::read_to_string(out.join("daily.csv")).unwrap().lines().count(), 1);
    assert!(fs::read_to_string(out.join("daily.svg")).unwrap().contains("no data"));
    assert!(stdout(&o).contains("points: 0"));

    let rows: Vec<(String, f64)> = (0..60)
        .map(|h| (format!("2024-03-{:02}T{:02}:00:00Z", 1 + h / 12, h % 12), 0.10))
        .collect();
    let rows: Vec<(&str, f64)> = rows.iter().map(|(t, b)| (t.as_str(), *b)).collect();
    let constant = derived(dir.path(), &rows);
    let out = dir.path().join("const");
    let o = run(&["analyze", constant.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    let mut rdr = csv::Reader::from_path(out.join("daily.csv")).unwrap();
    let mut n = 0;
    for r in rdr.records() {
        assert!((r.unwrap()[2].parse::<f64>().unwrap() - 0.10).abs() < 1e-12);
        n += 1;
    }
    assert_eq!(n, 5);
    let monthly = fs::read_to_string(out.join("monthly.csv")).unwrap();
    let mean: f64 = monthly.lines().nth(1).unwrap().split(',').nth(2).unwrap().parse().unwrap();
    assert!((mean - 0.10).abs() < 1e-12);

    let missing = run(&["analyze", "/nonexistent/derived", "--out", out.to_str().unwrap()]);
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn classify_image_anchors() {
    let dir = tempfile::tempdir().unwrap();
    let white = dir.path().join("white.pgm");
    write_pgm(&white, &speckled(100, 100, 0));
    let o = run(&["classify-image", white.to_str().unwrap()]);
    assert!(stdout(&o).contains("0.00% black") && stdout(&o).contains("no_dust"), "{}", stdout(&o));

    let heavy = dir.path().join("heavy.pgm");
    write_pgm(&heavy, &speckled(100, 100, 2519));
    let o = run(&["classify-image", heavy.to_str().unwrap(), "--json"]);
    let v: serde_json::Value = serde_json::from_str(stdout(&o).trim()).unwrap();
    assert_eq!(v["black_ratio"], 0.2519);
    assert_eq!(v["class"], "heavy_dust");

    let medium = dir.path().join("medium.pgm");
    write_pgm(&medium, &speckled(100, 100, 1727));
    assert!(stdout(&run(&["classify-image", medium.to_str().unwrap()])).contains("17.27% black"));

    let junk = dir.path().join("junk.pgm");
    fs::write(&junk, b"P5\n10 10\n255\nshort").unwrap();
    assert_eq!(run(&["classify-image", junk.to_str().unwrap()]).status.code(), Some(2));
    assert_ne!(run(&["classify-image", "/nonexistent.png"]).status.code(), Some(0));
}

#[test]
fn png_input_matches_pnm() {
    let dir = tempfile::tempdir().unwrap();
    let img = speckled(64, 48, 500);
    let png = dir.path().join("s.png");
    image::GrayImage::from_raw(64, 48, img.pixels().to_vec()).unwrap().save(&png).unwrap();
    let pgm = dir.path().join("s.pgm");
    write_pgm(&pgm, &img);
    let a = stdout(&run(&["classify-image", png.to_str().unwrap(), "--json"]));
    let b = stdout(&run(&["classify-image", pgm.to_str().unwrap(), "--json"]));
    let va: serde_json::Value = serde_json::from_str(a.trim()).unwrap();
    let vb: serde_json::Value = serde_json::from_str(b.trim()).unwrap();
    assert_eq!(va["black_pixels"], vb["black_pixels"]);
}

#[test]
fn eval_iou_on_reference_boxes() {
    let voc = data("voc");
    let preds = data("panel_preds.csv");
    let o = run(&["eval-iou", preds.to_str().unwrap(), voc.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("panel Detection1 (iou, intersect, union): (0.762224242933666, 1675.8000000000004, 2198.565599999999) matched=true"), "{text}");
    assert!(text.contains("panel Detection2 (iou, intersect, union): (0.8623840939145838, 2680.7000000000007, 3108.475699999999) matched=true"), "{text}");
    assert!(text.contains("total tp=2 fp=0 fn=0"));

    let strict = stdout(&run(&["eval-iou", preds.to_str().unwrap(), voc.to_str().unwrap(), "--threshold", "1.0"]));
    assert!(strict.contains("total tp=0 fp=2 fn=2"));

    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("none.csv");
    fs::write(&empty, "image_id,label,xmin,ymin,xmax,ymax,confidence\n").unwrap();
    let none = stdout(&run(&["eval-iou", empty.to_str().unwrap(), voc.to_str().unwrap()]));
    assert!(none.contains("total tp=0 fp=0 fn=2 precision=n/a recall=0.000000"), "{none}");

    assert_eq!(run(&["eval-iou", preds.to_str().unwrap(), voc.to_str().unwrap(), "--threshold", "2"]).status.code(), Some(1));
}

#[test]
fn detect_then_evaluate() {
    let dir = tempfile::tempdir().unwrap();
    let mut img = speckled(200, 150, 0);
    let blobs = [(20, 30, 12, 9), (90, 40, 8, 8), (150, 100, 15, 20)];
    let mut xml = String::from("<annotation><filename>blobs.pgm</filename>");
    for &(x, y, w, h) in &blobs {
        for yy in y..y + h {
            for xx in x..x + w {
                img.set_gray(xx, yy, 10);
            }
        }
        xml.push_str(&format!(
            "<object><name>droppings</name><bndbox><xmin>{x}</xmin><ymin>{y}</ymin><xmax>{}</xmax><ymax>{}</ymax></bndbox></object>",
            x + w,
            y + h
        ));
    }
    xml.push_str("</annotation>");
    let pgm = dir.path().join("blobs.pgm");
    write_pgm(&pgm, &img);
    let voc = dir.path().join("voc");
    fs::create_dir(&voc).unwrap();
    fs::write(voc.join("blobs.xml"), xml).unwrap();
    let preds = dir.path().join("preds.csv");
    let o = run(&["detect", pgm.to_str().unwrap(), "--out", preds.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(fs::read_to_string(&preds).unwrap().lines().count(), 4);
    let e = stdout(&run(&["eval-iou", preds.to_str().unwrap(), voc.to_str().unwrap()]));
    assert!(e.contains("total tp=3 fp=0 fn=0"), "{e}");
    assert!(e.contains("(1.0, 108.0, 108.0) matched=true"), "{e}");
}

#[test]
fn calibrate_anchors_and_failures() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("fitted.toml");
    let o = run(&["calibrate", data("april_targets.toml").to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    let residuals: Vec<f64> = text
        .lines()
        .filter(|l| l.starts_with(|c: char| c.is_ascii_digit()))
        .map(|l| l.split_whitespace().nth(3).unwrap().parse().unwrap())
        .collect();
    assert_eq!(residuals.len(), 3);
    assert!(residuals.iter().all(|r| r.abs() <= 1.0), "{text}");
    let fitted = soilsense_core::sim::SimScenario::from_toml(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(fitted.name, "april-month");

    let single = dir.path().join("single.toml");
    fs::write(&single, "base = \"april-month\"\npoints = [{ day = 15, blockage_pct = 19.05 }]\n").unwrap();
    let o = run(&["calibrate", single.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(stderr(&o).contains("warning"), "{}", stderr(&o));

    let falling = dir.path().join("falling.toml");
    fs::write(
        &falling,
        "base = \"april-month\"\npoints = [{ day = 10, blockage_pct = 20.0 }, { day = 20, blockage_pct = 10.0 }]\n",
    )
    .unwrap();
    let o = run(&["calibrate", falling.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).to_lowercase().contains("infeasible"), "{}", stderr(&o));
}

#[test]
fn serve_round_trip_and_image_post() {
    let dir = tempfile::tempdir().unwrap();
    let s = Served::start(dir.path(), &[]);
    assert_eq!(http("GET", &format!("{}/health", s.url()), None), (200, "ok".into()));
    let body = concat!(
        r#"{"node":"n1","ts":"2024-04-05T12:00:00Z","role":"open","mode":"day","lux":50000}"#, "\n",
        r#"{"node":"n1","ts":"2024-04-05T12:00:00Z","role":"glass","mode":"day","lux":46000}"#, "\n",
    );
    let (code, _) = http("POST", &format!("{}/ingest", s.url()), Some(body.into()));
    assert_eq!(code, 200);
    let (code, latest) = http("GET", &format!("{}/datastream/n1/blockage/latest", s.url()), None);
    assert_eq!(code, 200);
    let v: serde_json::Value = serde_json::from_str(&latest).unwrap();
    assert_eq!(v["ts"], "2024-04-05T12:00:00Z");
    assert!((v["value"].as_f64().unwrap() - 0.08).abs() < 1e-12);

    let img = dir.path().join("panel.pgm");
    write_pgm(&img, &speckled(50, 40, 300));
    let o = run(&[
        "classify-image", img.to_str().unwrap(),
        "--post", &s.url(), "--node", "cam-7", "--ts", "2024-04-05T12:30:00Z",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let (_, latest) = http("GET", &format!("{}/datastream/cam-7/image_black_ratio/latest", s.url()), None);
    let v: serde_json::Value = serde_json::from_str(&latest).unwrap();
    assert_eq!(v["value"], 0.15);
}

#[test]
fn killed_server_replays_to_same_store() {
    let dir = tempfile::tempdir().unwrap();
    let sim = dir.path().join("sim");
    let live = dir.path().join("live");
    let again = dir.path().join("again");
    let o = run(&["simulate", "june-rain", "--interval", "600", "--out", sim.to_str().unwrap()]);
    assert!(o.status.success());
    let stream = fs::read_to_string(sim.join("stream.jsonl")).unwrap();
    {
        let s = Served::start(&live, &[]);
        let lines: Vec<&str> = stream.lines().collect();
        for chunk in lines.chunks(2000) {
            let (code, _) = http("POST", &format!("{}/ingest", s.url()), Some(chunk.join("\n")));
            assert_eq!(code, 200);
        }
        // dropped here: SIGKILL, no clean shutdown
    }
    let o = run(&["--data-dir", again.to_str().unwrap(), "replay", live.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let files = |d: &std::path::Path| {
        let mut v: Vec<_> = fs::read_dir(d.join("derived")).unwrap().map(|e| e.unwrap().path()).collect();
        v.sort();
        v.into_iter().map(|p| (p.file_name().unwrap().to_owned(), fs::read(&p).unwrap())).collect::<Vec<_>>()
    };
    let (a, b) = (files(&live), files(&again));
    assert_eq!(a.len(), 30);
    assert!(a == b, "derived stores differ");
}

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use anyhow::{bail, Context};
use soilsense_core::detection::{
    evaluate_image, parse_voc, BoundingBox, Detection, EvalTotals, LabeledBox,
};

use crate::args::EvalArgs;

pub fn read_predictions(path: &Path) -> anyhow::Result<BTreeMap<String, Vec<Detection>>> {
    let mut rdr = csv::ReaderBuilder::new()
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .with_context(|| format!("reading {}", path.display()))?;
    let headers = rdr.headers()?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h.eq_ignore_ascii_case(name))
            .with_context(|| format!("{}: missing column {name}", path.display()))
    };
    let (id, label) = (col("image_id")?, col("label")?);
    let coords = [col("xmin")?, col("ymin")?, col("xmax")?, col("ymax")?];
    let conf = headers.iter().position(|h| h.eq_ignore_ascii_case("confidence"));
    let mut out: BTreeMap<String, Vec<Detection>> = BTreeMap::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = i + 2;
        let field = |k: usize| rec.get(k).unwrap_or("");
        let mut c = [0.0; 4];
        for (slot, &k) in c.iter_mut().zip(&coords) {
            *slot = field(k)
                .parse()
                .with_context(|| format!("{}:{line}: bad coordinate {:?}", path.display(), field(k)))?;
        }
        let bbox = BoundingBox::new(c[0], c[1], c[2], c[3])
            .with_context(|| format!("{}:{line}", path.display()))?;
        let confidence = match conf.map(field) {
            None | Some("") => None,
            Some(t) => Some(t.parse().with_context(|| format!("{}:{line}: bad confidence {t:?}", path.display()))?),
        };
        out.entry(field(id).to_string()).or_default().push(Detection {
            label: field(label).to_string(),
            bbox,
            confidence,
        });
    }
    Ok(out)
}

pub fn read_annotations(path: &Path) -> anyhow::Result<BTreeMap<String, Vec<LabeledBox>>> {
    let files = if path.is_dir() {
        let mut v: Vec<_> = fs::read_dir(path)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x.eq_ignore_ascii_case("xml")))
            .collect();
        v.sort();
        v
    } else {
        vec![path.to_path_buf()]
    };
    let mut out = BTreeMap::new();
    for f in files {
        let text = fs::read_to_string(&f).with_context(|| format!("reading {}", f.display()))?;
        let ann = parse_voc(&text).with_context(|| format!("{}", f.display()))?;
        if out.insert(ann.image_id.clone(), ann.boxes).is_some() {
            bail!("{}: image {:?} annotated twice", f.display(), ann.image_id);
        }
    }
    Ok(out)
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or("n/a".into(), |x| format!("{x:.6}"))
}

pub fn run(a: &EvalArgs) -> anyhow::Result<()> {
    if !(0.0..=1.0).contains(&a.threshold) {
        return Err(crate::UsageError(format!("threshold {} outside [0, 1]", a.threshold)).into());
    }
    let preds = read_predictions(&a.predictions)?;
    let gts = read_annotations(&a.annotations)?;
    let mut ids: Vec<&String> = preds.keys().chain(gts.keys()).collect();
    ids.sort();
    ids.dedup();
    let mut totals = EvalTotals::default();
    for id in ids {
        let p = preds.get(id).map(Vec::as_slice).unwrap_or(&[]);
        let g = gts.get(id).map(Vec::as_slice).unwrap_or(&[]);
        if !gts.contains_key(id) {
            eprintln!("warning: no annotation for {id}; its predictions count as false positives");
        }
        let ev = evaluate_image(id, p, g, a.threshold);
        for line in &ev.lines {
            println!("{line}");
        }
        let r = &ev.report;
        println!(
            "{id} tp={} fp={} fn={} precision={} recall={}",
            r.true_positives,
            r.false_positives,
            r.false_negatives,
            fmt_opt(r.precision()),
            fmt_opt(r.recall())
        );
        totals.add(r);
    }
    println!(
        "total tp={} fp={} fn={} precision={} recall={} threshold={}",
        totals.true_positives,
        totals.false_positives,
        totals.false_negatives,
        fmt_opt(totals.precision()),
        fmt_opt(totals.recall()),
        a.threshold
    );
    Ok(())
}

use soilsense_core::detection::{
    evaluate_image, iou_components, match_detections, parse_voc, BoundingBox, Detection,
    LabeledBox,
};

fn b(a: f64, c: f64, d: f64, e: f64) -> BoundingBox {
    BoundingBox::new(a, c, d, e).unwrap()
}

// ground truth first, then the prediction
fn fixture() -> [(BoundingBox, BoundingBox); 2] {
    [
        (b(100.0, 200.0, 132.0, 257.0), b(102.6, 198.62, 136.91, 258.38)),
        (b(210.0, 240.0, 260.0, 295.0), b(211.26, 237.74, 262.33, 297.25)),
    ]
}

#[test]
fn reported_triples_are_reproduced() {
    // expected values written with 17 significant digits
    #[allow(clippy::excessive_precision)]
    let expect = [
        (0.762224242933666, 1675.8000000000004, 2198.5655999999999),
        (0.8623840939145838, 2680.7000000000007, 3108.4756999999999),
    ];
    for ((gt, pred), (iou, inter, union)) in fixture().iter().zip(expect) {
        let c = iou_components(pred, gt);
        assert!((c.iou - iou).abs() <= 1e-12, "{} vs {}", c.iou, iou);
        assert!((c.intersect - inter).abs() <= 1e-9);
        assert!((c.union - union).abs() <= 1e-9);
        assert!((inter / union - iou).abs() <= 1e-12);
    }
}

#[test]
fn both_match_at_half() {
    let gts: Vec<LabeledBox> = fixture()
        .iter()
        .map(|(g, _)| LabeledBox { label: "droppings".into(), bbox: *g })
        .collect();
    let preds: Vec<Detection> = fixture()
        .iter()
        .map(|(_, p)| Detection { label: "Droppings".into(), bbox: *p, confidence: Some(1.0) })
        .collect();
    let r = match_detections(&preds, &gts, 0.5);
    assert_eq!((r.true_positives, r.false_positives, r.false_negatives), (2, 0, 0));

    let ev = evaluate_image("panel", &preds, &gts, 0.5);
    assert_eq!(
        ev.lines[0].to_string(),
        "panel Detection1 (iou, intersect, union): (0.762224242933666, 1675.8000000000004, 2198.565599999999) matched=true"
    );

    let strict = match_detections(&preds, &gts, 1.0);
    assert_eq!(strict.true_positives, 0);
}

#[test]
fn voc_fixture_round_trip() {
    let xml = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/tests/data/panel.xml")).unwrap();
    let ann = parse_voc(&xml).unwrap();
    assert_eq!(ann.image_id, "panel");
    assert_eq!(ann.boxes.len(), 2);
    assert_eq!(ann.boxes[0].bbox, fixture()[0].0);
}

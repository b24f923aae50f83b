use std::fmt;

use super::matching::same_label;
use super::{iou_components, match_detections, Detection, IouComponents, LabeledBox, MatchReport};

/// One prediction's line in an evaluation report.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectionLine {
    pub image_id: String,
    /// 1-based position of the prediction within its image.
    pub index: usize,
    /// Against the matched ground truth, else the best-overlapping one.
    pub components: IouComponents,
    pub gt: Option<usize>,
    pub matched: bool,
}

impl fmt::Display for DetectionLine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = &self.components;
        write!(
            f,
            "{} Detection{} (iou, intersect, union): ({:?}, {:?}, {:?}) matched={}",
            self.image_id, self.index, c.iou, c.intersect, c.union, self.matched
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ImageEvaluation {
    pub lines: Vec<DetectionLine>,
    pub report: MatchReport,
}

pub fn evaluate_image(
    image_id: &str,
    preds: &[Detection],
    gts: &[LabeledBox],
    threshold: f64,
) -> ImageEvaluation {
    let report = match_detections(preds, gts, threshold);
    let lines = preds
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let (gt, matched) = match report.pair_for_pred(i) {
                Some(pair) => (Some(pair.gt), true),
                None => {
                    let best = gts
                        .iter()
                        .enumerate()
                        .filter(|(_, g)| same_label(&p.label, &g.label))
                        .map(|(gi, g)| (gi, iou_components(&p.bbox, &g.bbox).iou))
                        .fold(None::<(usize, f64)>, |acc, cur| match acc {
                            Some(a) if a.1 >= cur.1 => Some(a),
                            _ => Some(cur),
                        });
                    (best.map(|b| b.0), false)
                }
            };
            let components = match gt {
                Some(g) => iou_components(&p.bbox, &gts[g].bbox),
                None => IouComponents {
                    iou: 0.0,
                    intersect: 0.0,
                    union: p.bbox.area(),
                },
            };
            DetectionLine {
                image_id: image_id.to_string(),
                index: i + 1,
                components,
                gt,
                matched,
            }
        })
        .collect();
    ImageEvaluation { lines, report }
}

/// Counts summed over images.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct EvalTotals {
    pub true_positives: usize,
    pub false_positives: usize,
    pub false_negatives: usize,
}

impl EvalTotals {
    pub fn add(&mut self, r: &MatchReport) {
        self.true_positives += r.true_positives;
        self.false_positives += r.false_positives;
        self.false_negatives += r.false_negatives;
    }

    pub fn precision(&self) -> Option<f64> {
        let n = self.true_positives + self.false_positives;
        (n > 0).then(|| self.true_positives as f64 / n as f64)
    }

    pub fn recall(&self) -> Option<f64> {
        let n = self.true_positives + self.false_negatives;
        (n > 0).then(|| self.true_positives as f64 / n as f64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::detection::BoundingBox;

    fn lb(a: f64, b: f64, c: f64, d: f64) -> LabeledBox {
        LabeledBox {
            label: "droppings".into(),
            bbox: BoundingBox::new(a, b, c, d).unwrap(),
        }
    }

    #[test]
    fn line_format() {
        let gts = [lb(0.0, 0.0, 10.0, 10.0)];
        let preds = [Detection::from(lb(5.0, 0.0, 15.0, 10.0))];
        let ev = evaluate_image("img7", &preds, &gts, 0.5);
        assert_eq!(
            ev.lines[0].to_string(),
            "img7 Detection1 (iou, intersect, union): (0.3333333333333333, 50.0, 150.0) matched=false"
        );
        assert_eq!(ev.lines[0].gt, Some(0));
    }

    #[test]
    fn unmatched_without_candidates() {
        let ev = evaluate_image("x", &[Detection::from(lb(0.0, 0.0, 2.0, 3.0))], &[], 0.5);
        assert_eq!(ev.lines[0].components.union, 6.0);
        assert!(!ev.lines[0].matched);
    }

    #[test]
    fn totals() {
        let mut t = EvalTotals::default();
        assert_eq!(t.precision(), None);
        let ev = evaluate_image("a", &[Detection::from(lb(0.0, 0.0, 1.0, 1.0))], &[lb(0.0, 0.0, 1.0, 1.0)], 0.5);
        t.add(&ev.report);
        t.add(&evaluate_image("b", &[], &[lb(0.0, 0.0, 1.0, 1.0)], 0.5).report);
        assert_eq!(t.precision(), Some(1.0));
        assert_eq!(t.recall(), Some(0.5));
    }
}

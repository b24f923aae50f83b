use serde::{Deserialize, Serialize};

use super::{iou_components, BoundingBox, LabeledBox};

pub const DEFAULT_IOU_THRESHOLD: f64 = 0.5;

/// A predicted box. Confidence is carried through but the matcher ignores it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Detection {
    pub label: String,
    pub bbox: BoundingBox,
    pub confidence: Option<f64>,
}

impl From<LabeledBox> for Detection {
    fn from(b: LabeledBox) -> Self {
        Detection {
            label: b.label,
            bbox: b.bbox,
            confidence: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MatchPair {
    pub pred: usize,
    pub gt: usize,
    pub iou: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchReport {
    pub pairs: Vec<MatchPair>,
    pub true_positives: usize,
    pub false_positives: usize,
    pub false_negatives: usize,
    pub threshold: f64,
}

impl MatchReport {
    /// `None` when there are no predictions.
    pub fn precision(&self) -> Option<f64> {
        let n = self.true_positives + self.false_positives;
        (n > 0).then(|| self.true_positives as f64 / n as f64)
    }

    /// `None` when there is no ground truth.
    pub fn recall(&self) -> Option<f64> {
        let n = self.true_positives + self.false_negatives;
        (n > 0).then(|| self.true_positives as f64 / n as f64)
    }

    pub fn pair_for_pred(&self, pred: usize) -> Option<&MatchPair> {
        self.pairs.iter().find(|p| p.pred == pred)
    }
}

pub(crate) fn same_label(a: &str, b: &str) -> bool {
    a.eq_ignore_ascii_case(b)
}

/// Greedy one-to-one matching in descending IoU order. Candidate pairs need
/// equal labels (ignoring case) and IoU at or above the threshold; IoU ties
/// go to the lower prediction index, then the lower ground-truth index.
pub fn match_detections(preds: &[Detection], gts: &[LabeledBox], threshold: f64) -> MatchReport {
    let mut candidates = Vec::new();
    for (pi, p) in preds.iter().enumerate() {
        for (gi, g) in gts.iter().enumerate() {
            if !same_label(&p.label, &g.label) {
                continue;
            }
            let iou = iou_components(&p.bbox, &g.bbox).iou;
            if iou >= threshold {
                candidates.push(MatchPair { pred: pi, gt: gi, iou });
            }
        }
    }
    candidates.sort_by(|a, b| {
        b.iou
            .total_cmp(&a.iou)
            .then(a.pred.cmp(&b.pred))
            .then(a.gt.cmp(&b.gt))
    });

    let mut pred_used = vec![false; preds.len()];
    let mut gt_used = vec![false; gts.len()];
    let mut pairs = Vec::new();
    for c in candidates {
        if pred_used[c.pred] || gt_used[c.gt] {
            continue;
        }
        pred_used[c.pred] = true;
        gt_used[c.gt] = true;
        pairs.push(c);
    }
    let tp = pairs.len();
    MatchReport {
        true_positives: tp,
        false_positives: preds.len() - tp,
        false_negatives: gts.len() - tp,
        pairs,
        threshold,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn gt(a: f64, b: f64, c: f64, d: f64) -> LabeledBox {
        LabeledBox {
            label: "droppings".into(),
            bbox: BoundingBox::new(a, b, c, d).unwrap(),
        }
    }

    fn det(a: f64, b: f64, c: f64, d: f64) -> Detection {
        gt(a, b, c, d).into()
    }

    #[test]
    fn empty_preds() {
        let r = match_detections(&[], &[gt(0.0, 0.0, 1.0, 1.0)], 0.5);
        assert_eq!((r.true_positives, r.false_negatives), (0, 1));
        assert_eq!(r.recall(), Some(0.0));
        assert_eq!(r.precision(), None);
    }

    #[test]
    fn two_preds_one_gt() {
        // iou 0.8 and 0.6 against a 10x10 box
        let g = gt(0.0, 0.0, 10.0, 10.0);
        let strong = det(0.0, 0.0, 10.0, 8.0);
        let weak = det(0.0, 0.0, 6.0, 10.0);
        let r = match_detections(&[weak, strong], &[g], 0.5);
        assert_eq!(r.pairs, vec![MatchPair { pred: 1, gt: 0, iou: 0.8 }]);
        assert_eq!((r.true_positives, r.false_positives), (1, 1));
    }

    #[test]
    fn labels_compare_case_insensitively() {
        let mut p = det(0.0, 0.0, 1.0, 1.0);
        p.label = "DROPPINGS".into();
        assert_eq!(match_detections(&[p.clone()], &[gt(0.0, 0.0, 1.0, 1.0)], 0.5).true_positives, 1);
        p.label = "leaf".into();
        assert_eq!(match_detections(&[p], &[gt(0.0, 0.0, 1.0, 1.0)], 0.5).true_positives, 0);
    }

    #[test]
    fn threshold_is_inclusive() {
        let g = gt(0.0, 0.0, 10.0, 10.0);
        let p = det(0.0, 0.0, 5.0, 10.0);
        assert_eq!(match_detections(std::slice::from_ref(&p), std::slice::from_ref(&g), 0.5).true_positives, 1);
        assert_eq!(match_detections(&[p], &[g], 0.5000001).true_positives, 0);
    }

    /// Every one-to-one assignment above threshold, scored by its IoU list
    /// sorted in descending order; the lexicographically largest wins.
    fn exhaustive(preds: &[Detection], gts: &[LabeledBox], t: f64) -> Vec<(usize, usize)> {
        // (descending IoU key, assignment)
        type Best = Option<(Vec<f64>, Vec<(usize, usize)>)>;
        fn rec(
            i: usize,
            preds: &[Detection],
            gts: &[LabeledBox],
            t: f64,
            used: &mut Vec<bool>,
            cur: &mut Vec<(usize, usize, f64)>,
            best: &mut Best,
        ) {
            if i == preds.len() {
                let mut key: Vec<f64> = cur.iter().map(|c| c.2).collect();
                key.sort_by(|a, b| b.total_cmp(a));
                let better = match best {
                    None => true,
                    Some((bk, _)) => {
                        let n = key.len().max(bk.len());
                        let pad = |v: &Vec<f64>, k: usize| v.get(k).copied().unwrap_or(-1.0);
                        (0..n)
                            .map(|k| pad(&key, k).total_cmp(&pad(bk, k)))
                            .find(|o| o.is_ne())
                            .is_some_and(|o| o.is_gt())
                    }
                };
                if better {
                    let mut pairs: Vec<_> = cur.iter().map(|c| (c.0, c.1)).collect();
                    pairs.sort();
                    *best = Some((key, pairs));
                }
                return;
            }
            rec(i + 1, preds, gts, t, used, cur, best);
            for g in 0..gts.len() {
                if used[g] {
                    continue;
                }
                let iou = iou_components(&preds[i].bbox, &gts[g].bbox).iou;
                if iou >= t {
                    used[g] = true;
                    cur.push((i, g, iou));
                    rec(i + 1, preds, gts, t, used, cur, best);
                    cur.pop();
                    used[g] = false;
                }
            }
        }
        let mut best = None;
        rec(0, preds, gts, t, &mut vec![false; gts.len()], &mut Vec::new(), &mut best);
        best.map(|b| b.1).unwrap_or_default()
    }

    fn arb_boxes(max: usize) -> impl Strategy<Value = Vec<(f64, f64, f64, f64)>> {
        prop::collection::vec((0.0f64..20.0, 0.0f64..20.0, 1.0f64..15.0, 1.0f64..15.0), 0..=max)
    }

    proptest! {
        #[test]
        fn greedy_equals_exhaustive_on_small_instances(p in arb_boxes(3), g in arb_boxes(3), t in 0.05f64..0.9) {
            let preds: Vec<Detection> = p.iter().map(|&(x, y, w, h)| det(x, y, x + w, y + h)).collect();
            let gts: Vec<LabeledBox> = g.iter().map(|&(x, y, w, h)| gt(x, y, x + w, y + h)).collect();
            let r = match_detections(&preds, &gts, t);
            let mut got: Vec<_> = r.pairs.iter().map(|p| (p.pred, p.gt)).collect();
            got.sort();
            prop_assert_eq!(got, exhaustive(&preds, &gts, t));
            prop_assert_eq!(r.true_positives + r.false_positives, preds.len());
            prop_assert_eq!(r.true_positives + r.false_negatives, gts.len());
            prop_assert!(r.pairs.iter().all(|p| p.iou >= t));
        }
    }
}

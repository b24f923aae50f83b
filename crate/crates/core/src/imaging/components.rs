use crate::detection::BoundingBox;

use super::BinaryImage;

/// A 4-connected black region. Max edges are exclusive.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Region {
    pub label: u32,
    pub area: usize,
    pub x_min: usize,
    pub y_min: usize,
    pub x_max: usize,
    pub y_max: usize,
}

impl Region {
    pub fn to_box(&self) -> BoundingBox {
        BoundingBox::new(
            self.x_min as f64,
            self.y_min as f64,
            self.x_max as f64,
            self.y_max as f64,
        )
        .expect("a region covers at least one pixel")
    }
}

/// Labels every black pixel with its region (1-based); white pixels get 0.
/// Regions are numbered in raster order of their first pixel.
pub fn label_regions(bin: &BinaryImage) -> (Vec<u32>, Vec<Region>) {
    let (w, h) = (bin.width(), bin.height());
    let mut labels = vec![0u32; w * h];
    let mut regions = Vec::new();
    let mut stack = Vec::new();
    for start in 0..w * h {
        if !bin.bits()[start] || labels[start] != 0 {
            continue;
        }
        let label = regions.len() as u32 + 1;
        let mut r = Region {
            label,
            area: 0,
            x_min: usize::MAX,
            y_min: usize::MAX,
            x_max: 0,
            y_max: 0,
        };
        labels[start] = label;
        stack.push(start);
        while let Some(i) = stack.pop() {
            let (x, y) = (i % w, i / w);
            r.area += 1;
            r.x_min = r.x_min.min(x);
            r.y_min = r.y_min.min(y);
            r.x_max = r.x_max.max(x + 1);
            r.y_max = r.y_max.max(y + 1);
            let mut visit = |j: usize| {
                if bin.bits()[j] && labels[j] == 0 {
                    labels[j] = label;
                    stack.push(j);
                }
            };
            if x > 0 {
                visit(i - 1);
            }
            if x + 1 < w {
                visit(i + 1);
            }
            if y > 0 {
                visit(i - w);
            }
            if y + 1 < h {
                visit(i + w);
            }
        }
        regions.push(r);
    }
    (labels, regions)
}

pub fn connected_components(bin: &BinaryImage, min_area: usize) -> Vec<BoundingBox> {
    let min_area = min_area.max(1);
    label_regions(bin)
        .1
        .iter()
        .filter(|r| r.area >= min_area)
        .map(Region::to_box)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn bin(w: usize, h: usize, black: &[(usize, usize)]) -> BinaryImage {
        let mut bits = vec![false; w * h];
        for &(x, y) in black {
            bits[y * w + x] = true;
        }
        BinaryImage::new(w, h, bits).unwrap()
    }

    #[test]
    fn white_image_has_no_components() {
        assert!(connected_components(&bin(5, 5, &[]), 1).is_empty());
    }

    #[test]
    fn square_box_is_exclusive() {
        let px: Vec<_> = (2..5).flat_map(|y| (2..5).map(move |x| (x, y))).collect();
        let boxes = connected_components(&bin(8, 8, &px), 1);
        assert_eq!(boxes, vec![BoundingBox::new(2.0, 2.0, 5.0, 5.0).unwrap()]);
    }

    #[test]
    fn diagonal_pixels_are_separate() {
        let (_, regions) = label_regions(&bin(2, 2, &[(0, 0), (1, 1)]));
        assert_eq!(regions.len(), 2);
    }

    #[test]
    fn min_area_filters() {
        let img = bin(6, 1, &[(0, 0), (2, 0), (3, 0)]);
        assert_eq!(connected_components(&img, 2).len(), 1);
        assert_eq!(connected_components(&img, 1).len(), 2);
    }

    // flood fill written independently: repeated relaxation to the minimum index
    fn oracle_labels(b: &BinaryImage) -> Vec<Option<usize>> {
        let (w, h) = (b.width(), b.height());
        let mut lab: Vec<Option<usize>> = (0..w * h).map(|i| b.bits()[i].then_some(i)).collect();
        loop {
            let mut changed = false;
            for y in 0..h {
                for x in 0..w {
                    let i = y * w + x;
                    let Some(mut m) = lab[i] else { continue };
                    let nbrs = [
                        (x > 0).then(|| i - 1),
                        (x + 1 < w).then(|| i + 1),
                        (y > 0).then(|| i - w),
                        (y + 1 < h).then(|| i + w),
                    ];
                    for j in nbrs.into_iter().flatten() {
                        if let Some(l) = lab[j] {
                            m = m.min(l);
                        }
                    }
                    if Some(m) != lab[i] {
                        lab[i] = Some(m);
                        changed = true;
                    }
                }
            }
            if !changed {
                return lab;
            }
        }
    }

    proptest! {
        #[test]
        fn regions_partition_black_pixels(
            (w, h, bits) in (1usize..10, 1usize..10).prop_flat_map(|(w, h)| (Just(w), Just(h), prop::collection::vec(any::<bool>(), w * h)))
        ) {
            let b = BinaryImage::new(w, h, bits).unwrap();
            let (labels, regions) = label_regions(&b);
            let oracle = oracle_labels(&b);
            for (l, bit) in labels.iter().zip(b.bits()) {
                prop_assert_eq!(*l != 0, *bit);
            }
            // same partition as the oracle
            for i in 0..w * h {
                for j in 0..w * h {
                    if b.bits()[i] && b.bits()[j] {
                        prop_assert_eq!(labels[i] == labels[j], oracle[i] == oracle[j]);
                    }
                }
            }
            let total: usize = regions.iter().map(|r| r.area).sum();
            prop_assert_eq!(total, b.black_count());
            for r in &regions {
                for y in 0..h {
                    for x in 0..w {
                        if labels[y * w + x] == r.label {
                            prop_assert!(x >= r.x_min && x < r.x_max && y >= r.y_min && y < r.y_max);
                        }
                    }
                }
            }
        }
    }
}

use serde::{Deserialize, Serialize};

use super::DetectionError;

/// Axis-aligned box in continuous pixel coordinates (area has no +1).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundingBox {
    pub xmin: f64,
    pub ymin: f64,
    pub xmax: f64,
    pub ymax: f64,
}

impl BoundingBox {
    pub fn new(xmin: f64, ymin: f64, xmax: f64, ymax: f64) -> Result<Self, DetectionError> {
        if ![xmin, ymin, xmax, ymax].iter().all(|v| v.is_finite()) {
            return Err(DetectionError::NonFinite);
        }
        if xmax <= xmin || ymax <= ymin {
            return Err(DetectionError::DegenerateBox {
                xmin,
                ymin,
                xmax,
                ymax,
            });
        }
        Ok(Self {
            xmin,
            ymin,
            xmax,
            ymax,
        })
    }

    pub fn width(&self) -> f64 {
        self.xmax - self.xmin
    }

    pub fn height(&self) -> f64 {
        self.ymax - self.ymin
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IouComponents {
    pub iou: f64,
    pub intersect: f64,
    pub union: f64,
}

/// Evaluation order is fixed so that results are reproducible to the last bit:
/// callers pass the prediction first.
pub fn iou_components(a: &BoundingBox, b: &BoundingBox) -> IouComponents {
    let iw = a.xmax.min(b.xmax) - a.xmin.max(b.xmin);
    let ih = a.ymax.min(b.ymax) - a.ymin.max(b.ymin);
    let intersect = if iw > 0.0 && ih > 0.0 { iw * ih } else { 0.0 };
    let union = a.area() + b.area() - intersect;
    IouComponents {
        iou: intersect / union,
        intersect,
        union,
    }
}

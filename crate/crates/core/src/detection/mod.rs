//! Bounding boxes, VOC annotations, IoU matching.

mod bbox;
mod matching;
mod report;
mod voc;

use thiserror::Error;

pub use bbox::{iou_components, BoundingBox, IouComponents};
pub use matching::{match_detections, Detection, MatchPair, MatchReport, DEFAULT_IOU_THRESHOLD};
pub use report::{evaluate_image, DetectionLine, EvalTotals, ImageEvaluation};
pub use voc::{parse_voc, write_voc, Annotation, LabeledBox};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DetectionError {
    #[error("degenerate box ({xmin}, {ymin}, {xmax}, {ymax}): max must exceed min")]
    DegenerateBox {
        xmin: f64,
        ymin: f64,
        xmax: f64,
        ymax: f64,
    },
    #[error("non-finite box coordinate")]
    NonFinite,
    #[error("malformed XML: {0}")]
    Xml(String),
    #[error("missing element <{0}>")]
    MissingElement(&'static str),
    #[error("bad number in <{field}>: {text:?}")]
    BadNumber { field: &'static str, text: String },
}

use serde::{Deserialize, Serialize};

use super::{
    adaptive_enhance, binarize, box_blur, crop, pixel_report, to_grayscale, BinaryImage,
    ImageClassBounds, ImageDustClass, ImageError, PixelReport, RasterImage,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rect {
    pub x: usize,
    pub y: usize,
    pub w: usize,
    pub h: usize,
}

impl std::str::FromStr for Rect {
    type Err = String;

    /// `x,y,w,h`
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<usize> = s
            .split(',')
            .map(|p| p.trim().parse::<usize>())
            .collect::<Result<_, _>>()
            .map_err(|e| format!("bad rectangle {s:?}: {e}"))?;
        match parts[..] {
            [x, y, w, h] => Ok(Rect { x, y, w, h }),
            _ => Err(format!("rectangle {s:?} needs four values x,y,w,h")),
        }
    }
}

/// crop -> grayscale -> [denoise] -> [enhance] -> threshold -> count -> classify
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DustPipeline {
    pub crop: Option<Rect>,
    pub denoise: bool,
    /// Background-division radius; `None` skips the filter.
    pub enhance_radius: Option<usize>,
    pub threshold: u8,
    pub bounds: ImageClassBounds,
}

impl Default for DustPipeline {
    fn default() -> Self {
        Self {
            crop: None,
            denoise: false,
            enhance_radius: Some(15),
            threshold: 128,
            bounds: ImageClassBounds::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineResult {
    pub binary: BinaryImage,
    pub report: PixelReport,
    pub class: ImageDustClass,
}

impl DustPipeline {
    pub fn run(&self, img: &RasterImage) -> Result<PipelineResult, ImageError> {
        let mut cur = match self.crop {
            Some(r) => crop(img, r.x, r.y, r.w, r.h)?,
            None => img.clone(),
        };
        if cur.channels() == 3 {
            cur = to_grayscale(&cur)?;
        }
        if self.denoise {
            cur = box_blur(&cur, 1)?;
        }
        if let Some(radius) = self.enhance_radius {
            cur = adaptive_enhance(&cur, radius)?;
        }
        let binary = binarize(&cur, self.threshold)?;
        let report = pixel_report(&binary);
        Ok(PipelineResult {
            class: self.bounds.classify(report.black_ratio),
            binary,
            report,
        })
    }
}

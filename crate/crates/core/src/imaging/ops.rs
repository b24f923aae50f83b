use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{BinaryImage, ImageError, RasterImage};

pub fn crop(img: &RasterImage, x: usize, y: usize, w: usize, h: usize) -> Result<RasterImage, ImageError> {
    let fits = w > 0
        && h > 0
        && x.checked_add(w).is_some_and(|r| r <= img.width())
        && y.checked_add(h).is_some_and(|b| b <= img.height());
    if !fits {
        return Err(ImageError::CropOutOfBounds {
            x,
            y,
            w,
            h,
            width: img.width(),
            height: img.height(),
        });
    }
    let c = img.channels();
    let stride = img.width() * c;
    let mut out = Vec::with_capacity(w * h * c);
    for row in y..y + h {
        let start = row * stride + x * c;
        out.extend_from_slice(&img.pixels()[start..start + w * c]);
    }
    RasterImage::new(w, h, c, out)
}

/// Rec. 601 luma, rounded half away from zero.
pub fn to_grayscale(img: &RasterImage) -> Result<RasterImage, ImageError> {
    img.require_channels(3)?;
    let gray = img
        .pixels()
        .chunks_exact(3)
        .map(|p| {
            let y = 0.299 * p[0] as f64 + 0.587 * p[1] as f64 + 0.114 * p[2] as f64;
            y.round().clamp(0.0, 255.0) as u8
        })
        .collect();
    RasterImage::gray(img.width(), img.height(), gray)
}

/// Summed-area table with a zero border row and column.
fn integral(img: &RasterImage) -> Vec<u64> {
    let (w, h) = (img.width(), img.height());
    let mut sat = vec![0u64; (w + 1) * (h + 1)];
    for y in 0..h {
        let mut row = 0u64;
        for x in 0..w {
            row += img.pixels()[y * w + x] as u64;
            sat[(y + 1) * (w + 1) + x + 1] = sat[y * (w + 1) + x + 1] + row;
        }
    }
    sat
}

/// Sum and pixel count of the window of `radius` around (x, y), clipped to the image.
fn window(sat: &[u64], w: usize, h: usize, x: usize, y: usize, radius: usize) -> (u64, u64) {
    let x0 = x.saturating_sub(radius);
    let y0 = y.saturating_sub(radius);
    let x1 = (x + radius + 1).min(w);
    let y1 = (y + radius + 1).min(h);
    let s = |xx: usize, yy: usize| sat[yy * (w + 1) + xx];
    let sum = s(x1, y1) + s(x0, y0) - s(x0, y1) - s(x1, y0);
    (sum, ((x1 - x0) * (y1 - y0)) as u64)
}

/// Mean filter over a (2r+1)² window clipped at the borders; rounds half up.
pub fn box_blur(gray: &RasterImage, radius: usize) -> Result<RasterImage, ImageError> {
    gray.require_channels(1)?;
    let (w, h) = (gray.width(), gray.height());
    let sat = integral(gray);
    let mut out = Vec::with_capacity(w * h);
    for y in 0..h {
        for x in 0..w {
            let (sum, n) = window(&sat, w, h, x, y, radius);
            out.push(((2 * sum + n) / (2 * n)) as u8);
        }
    }
    RasterImage::gray(w, h, out)
}

/// Background division: `round(128 * p / mean)` where `mean` is the box mean
/// of the clipped neighbourhood, clamped to 255. A black neighbourhood maps to 128.
pub fn adaptive_enhance(gray: &RasterImage, radius: usize) -> Result<RasterImage, ImageError> {
    gray.require_channels(1)?;
    let radius = radius.max(1);
    let (w, h) = (gray.width(), gray.height());
    let sat = integral(gray);
    let mut out = Vec::with_capacity(w * h);
    for y in 0..h {
        for x in 0..w {
            let (sum, n) = window(&sat, w, h, x, y, radius);
            let p = gray.pixels()[y * w + x] as u64;
            let v = if sum == 0 {
                128
            } else {
                ((256 * p * n + sum) / (2 * sum)).min(255)
            };
            out.push(v as u8);
        }
    }
    RasterImage::gray(w, h, out)
}

pub fn binarize(gray: &RasterImage, threshold: u8) -> Result<BinaryImage, ImageError> {
    gray.require_channels(1)?;
    let bits = gray.pixels().iter().map(|&p| p < threshold).collect();
    BinaryImage::new(gray.width(), gray.height(), bits)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PixelReport {
    pub black_pixels: usize,
    pub white_pixels: usize,
    pub black_ratio: f64,
}

impl PixelReport {
    pub fn black_percent(&self) -> f64 {
        self.black_ratio * 100.0
    }
}

pub fn pixel_report(bin: &BinaryImage) -> PixelReport {
    let black = bin.black_count();
    let total = bin.bits().len();
    PixelReport {
        black_pixels: black,
        white_pixels: total - black,
        black_ratio: if total == 0 { 0.0 } else { black as f64 / total as f64 },
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ImageDustClass {
    NoDust,
    MediumDust,
    HeavyDust,
}

impl ImageDustClass {
    pub fn as_str(self) -> &'static str {
        match self {
            ImageDustClass::NoDust => "no_dust",
            ImageDustClass::MediumDust => "medium_dust",
            ImageDustClass::HeavyDust => "heavy_dust",
        }
    }
}

impl fmt::Display for ImageDustClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ImageDustClass {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace(['-', ' '], "_").as_str() {
            "no_dust" | "nodust" | "none" => Ok(ImageDustClass::NoDust),
            "medium_dust" | "mediumdust" | "medium" => Ok(ImageDustClass::MediumDust),
            "heavy_dust" | "heavydust" | "heavy" => Ok(ImageDustClass::HeavyDust),
            _ => Err(format!("unknown image dust class {s:?}")),
        }
    }
}

/// Black-ratio cut points, left-closed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ImageClassBounds {
    pub medium: f64,
    pub heavy: f64,
}

impl Default for ImageClassBounds {
    fn default() -> Self {
        Self {
            medium: 0.02,
            heavy: 0.22,
        }
    }
}

impl ImageClassBounds {
    pub fn classify(&self, black_ratio: f64) -> ImageDustClass {
        if black_ratio >= self.heavy {
            ImageDustClass::HeavyDust
        } else if black_ratio >= self.medium {
            ImageDustClass::MediumDust
        } else {
            ImageDustClass::NoDust
        }
    }
}

pub fn classify_image_dust(report: &PixelReport) -> ImageDustClass {
    ImageClassBounds::default().classify(report.black_ratio)
}

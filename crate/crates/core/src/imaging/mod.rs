//! Raster images and the dust pixel pipeline.

mod components;
mod ops;
mod pipeline;
mod pnm;
mod raster;

use thiserror::Error;

pub use components::{connected_components, label_regions, Region};
pub use ops::{
    adaptive_enhance, binarize, box_blur, classify_image_dust, crop, pixel_report, to_grayscale,
    ImageClassBounds, ImageDustClass, PixelReport,
};
pub use pipeline::{DustPipeline, PipelineResult, Rect};
pub use pnm::{decode_pnm, encode_pnm, PnmEncoding};
pub use raster::{BinaryImage, RasterImage};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ImageError {
    #[error("unsupported PNM format {0:?} (expected P2, P3, P5 or P6)")]
    UnsupportedFormat(String),
    #[error("unsupported maxval {0} (only 255 is accepted)")]
    UnsupportedMaxval(u32),
    #[error("malformed PNM header: {0}")]
    MalformedHeader(String),
    #[error("truncated pixel data: expected {expected} samples, found {found}")]
    Truncated { expected: usize, found: usize },
    #[error("invalid sample {0:?}")]
    InvalidSample(String),
    #[error("image dimensions must be positive, got {width}x{height}")]
    EmptyImage { width: usize, height: usize },
    #[error("pixel buffer length {len} does not match {width}x{height}x{channels}")]
    BufferMismatch {
        width: usize,
        height: usize,
        channels: usize,
        len: usize,
    },
    #[error("expected {expected} channel(s), image has {actual}")]
    ChannelMismatch { expected: usize, actual: usize },
    #[error("crop rectangle {x},{y} {w}x{h} exceeds {width}x{height} image")]
    CropOutOfBounds {
        x: usize,
        y: usize,
        w: usize,
        h: usize,
        width: usize,
        height: usize,
    },
}

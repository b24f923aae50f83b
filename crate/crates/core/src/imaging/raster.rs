use super::ImageError;

/// 8-bit image, row-major, interleaved channels (1 = gray, 3 = RGB).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RasterImage {
    width: usize,
    height: usize,
    channels: usize,
    pixels: Vec<u8>,
}

impl RasterImage {
    pub fn new(
        width: usize,
        height: usize,
        channels: usize,
        pixels: Vec<u8>,
    ) -> Result<Self, ImageError> {
        if width == 0 || height == 0 {
            return Err(ImageError::EmptyImage { width, height });
        }
        if channels != 1 && channels != 3 {
            return Err(ImageError::ChannelMismatch {
                expected: 1,
                actual: channels,
            });
        }
        if pixels.len() != width * height * channels {
            return Err(ImageError::BufferMismatch {
                width,
                height,
                channels,
                len: pixels.len(),
            });
        }
        Ok(Self {
            width,
            height,
            channels,
            pixels,
        })
    }

    pub fn gray(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self, ImageError> {
        Self::new(width, height, 1, pixels)
    }

    pub fn filled(width: usize, height: usize, channels: usize, value: u8) -> Result<Self, ImageError> {
        Self::new(width, height, channels, vec![value; width * height * channels])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn into_pixels(self) -> Vec<u8> {
        self.pixels
    }

    /// Samples of the pixel at (x, y).
    pub fn pixel(&self, x: usize, y: usize) -> &[u8] {
        let i = (y * self.width + x) * self.channels;
        &self.pixels[i..i + self.channels]
    }

    pub fn set_gray(&mut self, x: usize, y: usize, v: u8) {
        debug_assert_eq!(self.channels, 1);
        self.pixels[y * self.width + x] = v;
    }

    pub(crate) fn require_channels(&self, expected: usize) -> Result<(), ImageError> {
        if self.channels != expected {
            return Err(ImageError::ChannelMismatch {
                expected,
                actual: self.channels,
            });
        }
        Ok(())
    }
}

/// Two-level image; `true` is black (dust).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BinaryImage {
    width: usize,
    height: usize,
    bits: Vec<bool>,
}

impl BinaryImage {
    pub fn new(width: usize, height: usize, bits: Vec<bool>) -> Result<Self, ImageError> {
        if bits.len() != width * height {
            return Err(ImageError::BufferMismatch {
                width,
                height,
                channels: 1,
                len: bits.len(),
            });
        }
        Ok(Self {
            width,
            height,
            bits,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn is_black(&self, x: usize, y: usize) -> bool {
        self.bits[y * self.width + x]
    }

    pub fn black_count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }
}

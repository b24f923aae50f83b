//! Plain and binary PGM/PPM with maxval 255.

use super::{ImageError, RasterImage};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PnmEncoding {
    /// P2 / P3
    Plain,
    /// P5 / P6
    Binary,
}

struct Header {
    binary: bool,
    channels: usize,
    width: usize,
    height: usize,
    /// Offset of the first raster byte.
    data_start: usize,
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn skip_ws_and_comments(&mut self) {
        while self.pos < self.bytes.len() {
            let b = self.bytes[self.pos];
            if b == b'#' {
                while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                    self.pos += 1;
                }
            } else if b.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn token(&mut self) -> Option<&'a [u8]> {
        self.skip_ws_and_comments();
        let start = self.pos;
        while self.pos < self.bytes.len()
            && !self.bytes[self.pos].is_ascii_whitespace()
            && self.bytes[self.pos] != b'#'
        {
            self.pos += 1;
        }
        (self.pos > start).then(|| &self.bytes[start..self.pos])
    }

    fn number(&mut self, what: &str) -> Result<usize, ImageError> {
        let tok = self
            .token()
            .ok_or_else(|| ImageError::MalformedHeader(format!("missing {what}")))?;
        std::str::from_utf8(tok)
            .ok()
            .and_then(|s| s.parse::<usize>().ok())
            .ok_or_else(|| {
                ImageError::MalformedHeader(format!(
                    "{what} is not a number: {:?}",
                    String::from_utf8_lossy(tok)
                ))
            })
    }
}

fn parse_header(bytes: &[u8]) -> Result<Header, ImageError> {
    let mut cur = Cursor { bytes, pos: 0 };
    let magic = cur
        .token()
        .ok_or_else(|| ImageError::MalformedHeader("empty input".into()))?;
    let (binary, channels) = match magic {
        b"P2" => (false, 1),
        b"P3" => (false, 3),
        b"P5" => (true, 1),
        b"P6" => (true, 3),
        other => {
            return Err(ImageError::UnsupportedFormat(
                String::from_utf8_lossy(other).into_owned(),
            ))
        }
    };
    let width = cur.number("width")?;
    let height = cur.number("height")?;
    let maxval = cur.number("maxval")?;
    if maxval != 255 {
        return Err(ImageError::UnsupportedMaxval(maxval.min(u32::MAX as usize) as u32));
    }
    if width == 0 || height == 0 {
        return Err(ImageError::EmptyImage { width, height });
    }
    // exactly one whitespace byte separates maxval from a binary raster
    if binary {
        match bytes.get(cur.pos) {
            Some(b) if b.is_ascii_whitespace() => cur.pos += 1,
            _ => {
                return Err(ImageError::MalformedHeader(
                    "missing whitespace after maxval".into(),
                ))
            }
        }
    }
    Ok(Header {
        binary,
        channels,
        width,
        height,
        data_start: cur.pos,
    })
}

pub fn decode_pnm(bytes: &[u8]) -> Result<RasterImage, ImageError> {
    let h = parse_header(bytes)?;
    let expected = h
        .width
        .checked_mul(h.height)
        .and_then(|n| n.checked_mul(h.channels))
        .ok_or_else(|| ImageError::MalformedHeader("dimensions overflow".into()))?;
    let pixels = if h.binary {
        let data = &bytes[h.data_start..];
        if data.len() < expected {
            return Err(ImageError::Truncated {
                expected,
                found: data.len(),
            });
        }
        data[..expected].to_vec()
    } else {
        let mut cur = Cursor {
            bytes,
            pos: h.data_start,
        };
        let mut out = Vec::with_capacity(expected);
        while out.len() < expected {
            let Some(tok) = cur.token() else {
                return Err(ImageError::Truncated {
                    expected,
                    found: out.len(),
                });
            };
            let v = std::str::from_utf8(tok)
                .ok()
                .and_then(|s| s.parse::<u16>().ok())
                .filter(|&v| v <= 255)
                .ok_or_else(|| ImageError::InvalidSample(String::from_utf8_lossy(tok).into_owned()))?;
            out.push(v as u8);
        }
        out
    };
    RasterImage::new(h.width, h.height, h.channels, pixels)
}

/// Canonical encoding: magic, `width height`, `255`, each on its own line;
/// plain rasters write one image row per line with single spaces.
pub fn encode_pnm(img: &RasterImage, encoding: PnmEncoding) -> Vec<u8> {
    let magic = match (encoding, img.channels()) {
        (PnmEncoding::Plain, 1) => "P2",
        (PnmEncoding::Plain, _) => "P3",
        (PnmEncoding::Binary, 1) => "P5",
        (PnmEncoding::Binary, _) => "P6",
    };
    let mut out = format!("{magic}\n{} {}\n255\n", img.width(), img.height()).into_bytes();
    match encoding {
        PnmEncoding::Binary => out.extend_from_slice(img.pixels()),
        PnmEncoding::Plain => {
            let row_len = img.width() * img.channels();
            for row in img.pixels().chunks(row_len) {
                let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
                out.extend_from_slice(line.join(" ").as_bytes());
                out.push(b'\n');
            }
        }
    }
    out
}

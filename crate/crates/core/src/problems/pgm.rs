//! Binary gray-scale PGM (P5) images.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::problems::image::Image;

fn pgm_error(offset: usize, message: impl Into<String>) -> Error {
    Error::Pgm {
        offset,
        message: message.into(),
    }
}

struct Header {
    width: usize,
    height: usize,
    maxval: usize,
    payload_start: usize,
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Cursor<'_> {
    // Skips whitespace and `#` comments running to end of line.
    fn skip_separators(&mut self) {
        while let Some(&b) = self.bytes.get(self.pos) {
            if b == b'#' {
                while let Some(&c) = self.bytes.get(self.pos) {
                    self.pos += 1;
                    if c == b'\n' || c == b'\r' {
                        break;
                    }
                }
            } else if b.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn number(&mut self, what: &str) -> Result<usize> {
        self.skip_separators();
        let start = self.pos;
        while self.bytes.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(match self.bytes.get(self.pos) {
                Some(&b) => pgm_error(start, format!("expected {what}, found byte 0x{b:02x}")),
                None => pgm_error(start, format!("expected {what}, found end of file")),
            });
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| pgm_error(start, format!("{what} out of range")))
    }
}

fn parse_header(bytes: &[u8]) -> Result<Header> {
    if bytes.len() < 2 || &bytes[..2] != b"P5" {
        return Err(pgm_error(0, "missing P5 magic number"));
    }
    let mut cur = Cursor { bytes, pos: 2 };
    let width = cur.number("width")?;
    let height = cur.number("height")?;
    cur.skip_separators();
    let maxval_at = cur.pos;
    let maxval = cur.number("maxval")?;
    if width == 0 || height == 0 {
        return Err(pgm_error(2, format!("image dimensions must be positive, got {width}x{height}")));
    }
    if maxval != 255 && maxval != 65535 {
        return Err(pgm_error(
            maxval_at,
            format!("unsupported maxval {maxval}; expected 255 or 65535"),
        ));
    }
    match bytes.get(cur.pos) {
        Some(b) if b.is_ascii_whitespace() => {}
        _ => return Err(pgm_error(cur.pos, "expected a single whitespace byte after maxval")),
    }
    Ok(Header {
        width,
        height,
        maxval,
        payload_start: cur.pos + 1,
    })
}

/// Parses P5 bytes; intensities are scaled to `[0, 1]`.
pub fn pgm_decode(bytes: &[u8]) -> Result<Image> {
    let h = parse_header(bytes)?;
    let bytes_per_pixel = if h.maxval > 255 { 2 } else { 1 };
    let n = h.width * h.height;
    let expected = n * bytes_per_pixel;
    let payload = &bytes[h.payload_start..];
    if payload.len() < expected {
        return Err(pgm_error(
            h.payload_start,
            format!(
                "truncated payload: expected {expected} bytes, found {}",
                payload.len()
            ),
        ));
    }
    let scale = h.maxval as f64;
    let pixels = (0..n)
        .map(|i| {
            let v = if bytes_per_pixel == 2 {
                u16::from_be_bytes([payload[2 * i], payload[2 * i + 1]]) as f64
            } else {
                payload[i] as f64
            };
            v / scale
        })
        .collect();
    Image::new(h.width, h.height, pixels)
}

/// Encodes as P5 with maxval 255, clamping to `[0, 1]` and rounding to nearest.
pub fn pgm_encode(image: &Image) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", image.width(), image.height()).into_bytes();
    out.extend(
        image
            .pixels()
            .iter()
            .map(|p| (p.clamp(0.0, 1.0) * 255.0).round() as u8),
    );
    out
}

pub fn pgm_read(path: impl AsRef<Path>) -> Result<Image> {
    pgm_decode(&fs::read(path)?)
}

pub fn pgm_write(path: impl AsRef<Path>, image: &Image) -> Result<()> {
    fs::write(path, pgm_encode(image))?;
    Ok(())
}

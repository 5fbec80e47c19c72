//! Binary PGM (P5) and PPM (P6) with maxval 255 or 65535.
//!
//! Samples map linearly to `[0, 1]`; 16-bit samples are big-endian.

use std::fs;
use std::path::Path;

use splitkit_core::imaging::Image;
use thiserror::Error;

use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("byte {offset}: {message}")]
pub struct NetpbmError {
    pub offset: usize,
    pub message: String,
}

fn fail<T>(offset: usize, message: impl Into<String>) -> std::result::Result<T, NetpbmError> {
    Err(NetpbmError {
        offset,
        message: message.into(),
    })
}

struct Header<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Header<'_> {
    fn skip_separators(&mut self) {
        while let Some(&c) = self.bytes.get(self.pos) {
            if c == b'#' {
                while self.bytes.get(self.pos).is_some_and(|&c| c != b'\n' && c != b'\r') {
                    self.pos += 1;
                }
            } else if c.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn number(&mut self, what: &str) -> std::result::Result<usize, NetpbmError> {
        self.skip_separators();
        let start = self.pos;
        while self.bytes.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        if start == self.pos {
            return match self.bytes.get(self.pos) {
                None => fail(start, format!("header ends before {what}")),
                Some(_) => fail(start, format!("expected {what}")),
            };
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .map_or_else(|| fail(start, format!("{what} is out of range")), Ok)
    }
}

/// Decodes a P5/P6 file held in memory.
pub fn decode(bytes: &[u8]) -> std::result::Result<Image, NetpbmError> {
    let channels = match bytes.get(..2) {
        Some(b"P5") => 1,
        Some(b"P6") => 3,
        _ => return fail(0, "expected magic number P5 or P6"),
    };
    let mut header = Header { bytes, pos: 2 };
    if !bytes.get(2).is_some_and(|c| c.is_ascii_whitespace() || *c == b'#') {
        return fail(2, "expected whitespace after magic number");
    }
    let width = header.number("width")?;
    let height = header.number("height")?;
    let maxval_at = {
        header.skip_separators();
        header.pos
    };
    let maxval = header.number("maxval")?;
    if width == 0 || height == 0 {
        return fail(2, format!("image must be non-empty, got {width}x{height}"));
    }
    let sample_bytes = match maxval {
        255 => 1,
        65535 => 2,
        other => return fail(maxval_at, format!("unsupported maxval {other} (need 255 or 65535)")),
    };
    match bytes.get(header.pos) {
        Some(c) if c.is_ascii_whitespace() => header.pos += 1,
        Some(_) => return fail(header.pos, "expected single whitespace before raster"),
        None => return fail(header.pos, "header ends before raster"),
    }
    let start = header.pos;
    let count = width
        .checked_mul(height)
        .and_then(|p| p.checked_mul(channels))
        .ok_or(NetpbmError {
            offset: 2,
            message: "image dimensions overflow".into(),
        })?;
    let needed = count * sample_bytes;
    let payload = &bytes[start..];
    if payload.len() < needed {
        return fail(
            bytes.len(),
            format!("truncated raster: expected {needed} bytes, found {}", payload.len()),
        );
    }
    let scale = f64::from(maxval as u32);
    let data: Vec<f64> = if sample_bytes == 1 {
        payload[..needed].iter().map(|&b| f64::from(b) / scale).collect()
    } else {
        payload[..needed]
            .chunks_exact(2)
            .map(|c| f64::from(u16::from_be_bytes([c[0], c[1]])) / scale)
            .collect()
    };
    Image::new(height, width, channels, data).or_else(|e| fail(start, e.to_string()))
}

/// Encodes with the given maxval (255 or 65535), clamping to `[0, 1]` and
/// rounding to nearest.
pub fn encode(img: &Image, maxval: u16) -> std::result::Result<Vec<u8>, NetpbmError> {
    if maxval != 255 && maxval != 65535 {
        return fail(0, format!("unsupported maxval {maxval} (need 255 or 65535)"));
    }
    let magic = if img.channels() == 1 { "P5" } else { "P6" };
    let mut out = format!("{magic}\n{} {}\n{maxval}\n", img.width(), img.height()).into_bytes();
    let scale = f64::from(maxval);
    for &v in img.data() {
        let q = (v.clamp(0.0, 1.0) * scale).round() as u16;
        if maxval == 255 {
            out.push(q as u8);
        } else {
            out.extend_from_slice(&q.to_be_bytes());
        }
    }
    Ok(out)
}

pub fn read_image(path: &Path) -> Result<Image> {
    let bytes = fs::read(path).map_err(|e| CliError::io(path, e))?;
    decode(&bytes).map_err(|e| CliError::Format {
        path: path.to_path_buf(),
        offset: e.offset,
        message: e.message,
    })
}

pub fn write_image(img: &Image, path: &Path, maxval: u16) -> Result<()> {
    let bytes = encode(img, maxval).map_err(|e| CliError::Config(e.message))?;
    fs::write(path, bytes).map_err(|e| CliError::io(path, e))
}

/// `pgm` for gray images, `ppm` for color.
pub fn extension(img: &Image) -> &'static str {
    if img.channels() == 1 {
        "pgm"
    } else {
        "ppm"
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gray_eight_bit() {
        let img = decode(b"P5\n2 2\n255\n\x00\xff\x00\xff").unwrap();
        assert_eq!((img.height(), img.width(), img.channels()), (2, 2, 1));
        assert_eq!(img.data(), &[0.0, 1.0, 0.0, 1.0]);
    }

    #[test]
    fn color_sixteen_bit_is_big_endian() {
        let mut bytes = b"P6 2 2 65535\n".to_vec();
        let samples: [u16; 12] = [0, 1, 256, 65535, 32768, 2, 3, 4, 5, 6, 7, 65534];
        for s in samples {
            bytes.extend_from_slice(&s.to_be_bytes());
        }
        let img = decode(&bytes).unwrap();
        assert_eq!(img.channels(), 3);
        for (v, s) in img.data().iter().zip(samples) {
            assert_eq!(*v, f64::from(s) / 65535.0);
        }
        assert_eq!(decode(&encode(&img, 65535).unwrap()).unwrap(), img);
    }

    #[test]
    fn comments_in_header() {
        let img = decode(b"P5 # a comment\n# another\n1 # w\n1\n255\n\x80").unwrap();
        assert_eq!(img.data(), &[128.0 / 255.0]);
    }

    #[test]
    fn errors_carry_offsets() {
        assert_eq!(decode(b"P3\n1 1\n255\n0").unwrap_err().offset, 0);
        let e = decode(b"P5\n2 2\n100\n\x00\x00\x00\x00").unwrap_err();
        assert_eq!(e.offset, 7);
        assert!(e.message.contains("maxval"));
        let e = decode(b"P5\n2 2\n255\n\x00\x00").unwrap_err();
        assert_eq!(e.offset, 13);
        assert!(e.message.contains("truncated"));
        let e = decode(b"P5\n2 x\n255\n").unwrap_err();
        assert_eq!(e.offset, 5);
        assert!(decode(b"P5\n2 2").is_err());
    }

    #[test]
    fn eight_bit_round_trip_is_within_quantization() {
        let data: Vec<f64> = (0..12).map(|k| k as f64 / 11.0).collect();
        let img = Image::new(2, 2, 3, data).unwrap();
        let back = decode(&encode(&img, 255).unwrap()).unwrap();
        for (a, b) in back.data().iter().zip(img.data()) {
            assert!((a - b).abs() <= 0.5 / 255.0 + 1e-15);
        }
        let again = decode(&encode(&back, 255).unwrap()).unwrap();
        assert_eq!(again, back);
    }
}

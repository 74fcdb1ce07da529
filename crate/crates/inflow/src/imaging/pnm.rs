//! Binary netpbm readers and writers: PGM (P5) for gray and edge rasters,
//! PPM (P6) for RGB frames.
//!
//! The writers emit a canonical header (`P5\n<w> <h>\n255\n`) so that a
//! read/write cycle reproduces the original bytes exactly. The readers
//! accept comments and arbitrary whitespace in the header but insist on
//! maxval 255 and an exact payload length.

use std::fs;
use std::path::Path;

use super::{EdgeMap, GrayImage, RgbImage};
use crate::error::{Error, Result};

fn format_err(format: &'static str, reason: impl Into<String>) -> Error {
    Error::Format {
        format,
        reason: reason.into(),
    }
}

/// Parses a netpbm header, returning (width, height, offset of pixel data).
fn parse_header(bytes: &[u8], magic: &[u8; 2], format: &'static str) -> Result<(u32, u32, usize)> {
    if bytes.len() < 2 || &bytes[0..2] != magic {
        return Err(format_err(
            format,
            format!("missing {} magic", String::from_utf8_lossy(magic)),
        ));
    }
    let mut pos = 2;
    let mut fields = [0u32; 3];
    for field in &mut fields {
        // Skip whitespace and '#' comments.
        loop {
            match bytes.get(pos) {
                Some(b) if b.is_ascii_whitespace() => pos += 1,
                Some(b'#') => {
                    while let Some(&b) = bytes.get(pos) {
                        pos += 1;
                        if b == b'\n' {
                            break;
                        }
                    }
                }
                _ => break,
            }
        }
        let start = pos;
        while bytes.get(pos).is_some_and(|b| b.is_ascii_digit()) {
            pos += 1;
        }
        if pos == start {
            return Err(format_err(format, "truncated header"));
        }
        let text = std::str::from_utf8(&bytes[start..pos]).unwrap();
        *field = text
            .parse::<u32>()
            .map_err(|_| format_err(format, format!("bad header field `{text}`")))?;
    }
    // Exactly one whitespace byte separates the header from the payload.
    if !bytes.get(pos).is_some_and(|b| b.is_ascii_whitespace()) {
        return Err(format_err(format, "missing separator before pixel data"));
    }
    pos += 1;
    let (w, h, maxval) = (fields[0], fields[1], fields[2]);
    if w == 0 || h == 0 {
        return Err(format_err(format, format!("degenerate dimensions {w}x{h}")));
    }
    if maxval != 255 {
        return Err(format_err(format, format!("unsupported maxval {maxval}")));
    }
    Ok((w, h, pos))
}

/// Encodes a grayscale image as binary PGM.
pub fn encode_pgm(img: &GrayImage) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", img.width(), img.height()).into_bytes();
    out.extend_from_slice(img.data());
    out
}

/// Decodes a binary PGM into a grayscale image.
pub fn decode_pgm(bytes: &[u8]) -> Result<GrayImage> {
    let (w, h, pos) = parse_header(bytes, b"P5", "pgm")?;
    let expected = w as usize * h as usize;
    let payload = &bytes[pos..];
    if payload.len() != expected {
        return Err(format_err(
            "pgm",
            format!("payload is {} bytes, expected {expected}", payload.len()),
        ));
    }
    GrayImage::from_raw(w, h, payload.to_vec())
}

/// Encodes an edge map as binary PGM with values {0, 255}.
pub fn encode_edge_pgm(edges: &EdgeMap) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", edges.width(), edges.height()).into_bytes();
    out.extend(edges.data().iter().map(|&e| if e { 255 } else { 0 }));
    out
}

/// Decodes a binary PGM holding only the values {0, 255} into an edge map.
pub fn decode_edge_pgm(bytes: &[u8]) -> Result<EdgeMap> {
    let gray = decode_pgm(bytes)?;
    let mut data = Vec::with_capacity(gray.data().len());
    for &p in gray.data() {
        match p {
            0 => data.push(false),
            255 => data.push(true),
            other => {
                return Err(format_err(
                    "pgm",
                    format!("edge map pixel {other} is neither 0 nor 255"),
                ))
            }
        }
    }
    EdgeMap::from_raw(gray.width(), gray.height(), data)
}

/// Encodes an RGB image as binary PPM.
pub fn encode_ppm(img: &RgbImage) -> Vec<u8> {
    let mut out = format!("P6\n{} {}\n255\n", img.width(), img.height()).into_bytes();
    out.extend_from_slice(img.data());
    out
}

/// Decodes a binary PPM into an RGB image.
pub fn decode_ppm(bytes: &[u8]) -> Result<RgbImage> {
    let (w, h, pos) = parse_header(bytes, b"P6", "ppm")?;
    let expected = w as usize * h as usize * 3;
    let payload = &bytes[pos..];
    if payload.len() != expected {
        return Err(format_err(
            "ppm",
            format!("payload is {} bytes, expected {expected}", payload.len()),
        ));
    }
    RgbImage::from_raw(w, h, payload.to_vec())
}

pub fn read_pgm(path: &Path) -> Result<GrayImage> {
    decode_pgm(&fs::read(path).map_err(|e| Error::io(path, e))?)
}

pub fn write_pgm(path: &Path, img: &GrayImage) -> Result<()> {
    fs::write(path, encode_pgm(img)).map_err(|e| Error::io(path, e))
}

pub fn read_edge_pgm(path: &Path) -> Result<EdgeMap> {
    decode_edge_pgm(&fs::read(path).map_err(|e| Error::io(path, e))?)
}

pub fn write_edge_pgm(path: &Path, edges: &EdgeMap) -> Result<()> {
    fs::write(path, encode_edge_pgm(edges)).map_err(|e| Error::io(path, e))
}

pub fn read_ppm(path: &Path) -> Result<RgbImage> {
    decode_ppm(&fs::read(path).map_err(|e| Error::io(path, e))?)
}

pub fn write_ppm(path: &Path, img: &RgbImage) -> Result<()> {
    fs::write(path, encode_ppm(img)).map_err(|e| Error::io(path, e))
}

use std::fs;
use std::path::Path;

use super::{GrayImage, SIDE};
use crate::error::{Error, Result};

/// Reads the next whitespace-delimited header token, skipping `#` comments.
fn next_token<'a>(bytes: &'a [u8], pos: &mut usize) -> Result<&'a [u8]> {
    loop {
        while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
            *pos += 1;
        }
        if *pos < bytes.len() && bytes[*pos] == b'#' {
            while *pos < bytes.len() && bytes[*pos] != b'\n' {
                *pos += 1;
            }
            continue;
        }
        break;
    }
    let start = *pos;
    while *pos < bytes.len() && !bytes[*pos].is_ascii_whitespace() {
        *pos += 1;
    }
    if start == *pos {
        return Err(Error::Format("PGM header ends early".into()));
    }
    Ok(&bytes[start..*pos])
}

fn header_number(bytes: &[u8], pos: &mut usize, what: &str) -> Result<usize> {
    let token = next_token(bytes, pos)?;
    std::str::from_utf8(token)
        .ok()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| {
            Error::Format(format!(
                "PGM {what} {:?} is not a number",
                String::from_utf8_lossy(token)
            ))
        })
}

/// Decodes a binary (P5) 28x28 PGM with maxval 255.
pub fn parse_pgm(bytes: &[u8]) -> Result<GrayImage> {
    let mut pos = 0;
    let magic = next_token(bytes, &mut pos)?;
    if magic != b"P5" {
        return Err(Error::Format(format!(
            "PGM magic {:?}, expected \"P5\"",
            String::from_utf8_lossy(magic)
        )));
    }
    let width = header_number(bytes, &mut pos, "width")?;
    let height = header_number(bytes, &mut pos, "height")?;
    let maxval = header_number(bytes, &mut pos, "maxval")?;
    if width != SIDE || height != SIDE {
        return Err(Error::Format(format!(
            "PGM is {width}x{height}, expected {SIDE}x{SIDE}"
        )));
    }
    if maxval != 255 {
        return Err(Error::Format(format!("PGM maxval {maxval}, expected 255")));
    }
    // exactly one whitespace byte separates the header from the raster
    if pos >= bytes.len() || !bytes[pos].is_ascii_whitespace() {
        return Err(Error::Format("PGM header not terminated by whitespace".into()));
    }
    pos += 1;
    let expected = width * height;
    let raster = &bytes[pos..];
    if raster.len() < expected {
        return Err(Error::Truncation {
            expected,
            found: raster.len(),
        });
    }
    GrayImage::new(width, height, raster[..expected].to_vec())
}

pub fn load_pgm(path: impl AsRef<Path>) -> Result<GrayImage> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    parse_pgm(&bytes)
}

pub fn encode_pgm(image: &GrayImage) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", image.width(), image.height()).into_bytes();
    out.extend_from_slice(image.pixels());
    out
}

pub fn write_pgm(path: impl AsRef<Path>, image: &GrayImage) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode_pgm(image)).map_err(|e| Error::io(path, e))
}

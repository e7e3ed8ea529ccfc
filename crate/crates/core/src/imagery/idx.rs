use std::fs;
use std::path::Path;

use super::{GrayImage, DIGITS, PIXELS, SIDE};
use crate::error::{Error, Result};

const IMAGE_MAGIC: u32 = 0x0000_0803;
const LABEL_MAGIC: u32 = 0x0000_0801;

fn read_u32(bytes: &[u8], offset: usize) -> Result<u32> {
    let word = bytes
        .get(offset..offset + 4)
        .ok_or(Error::Truncation {
            expected: offset + 4,
            found: bytes.len(),
        })?;
    Ok(u32::from_be_bytes([word[0], word[1], word[2], word[3]]))
}

fn check_magic(bytes: &[u8], want: u32) -> Result<()> {
    if bytes.len() < 4 {
        return Err(Error::Format(format!(
            "{} bytes is too short for an IDX magic number",
            bytes.len()
        )));
    }
    let magic = read_u32(bytes, 0)?;
    if magic != want {
        return Err(Error::Format(format!(
            "IDX magic {magic:#010x}, expected {want:#010x}"
        )));
    }
    Ok(())
}

pub fn parse_idx_images(bytes: &[u8]) -> Result<Vec<GrayImage>> {
    check_magic(bytes, IMAGE_MAGIC)?;
    let count = read_u32(bytes, 4)? as usize;
    let rows = read_u32(bytes, 8)? as usize;
    let cols = read_u32(bytes, 12)? as usize;
    if rows != SIDE || cols != SIDE {
        return Err(Error::Dimension(format!(
            "IDX images are {rows}x{cols}, expected {SIDE}x{SIDE}"
        )));
    }
    let expected = 16 + count * PIXELS;
    if bytes.len() < expected {
        return Err(Error::Truncation {
            expected,
            found: bytes.len(),
        });
    }
    bytes[16..expected]
        .chunks_exact(PIXELS)
        .map(|chunk| GrayImage::from_pixels(chunk.to_vec()))
        .collect()
}

pub fn parse_idx_labels(bytes: &[u8]) -> Result<Vec<u8>> {
    check_magic(bytes, LABEL_MAGIC)?;
    let count = read_u32(bytes, 4)? as usize;
    let expected = 8 + count;
    if bytes.len() < expected {
        return Err(Error::Truncation {
            expected,
            found: bytes.len(),
        });
    }
    let labels = &bytes[8..expected];
    if let Some((index, &value)) = labels
        .iter()
        .enumerate()
        .find(|(_, &b)| b as usize >= DIGITS)
    {
        return Err(Error::LabelRange { index, value });
    }
    Ok(labels.to_vec())
}

pub fn load_idx_images(path: impl AsRef<Path>) -> Result<Vec<GrayImage>> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    parse_idx_images(&bytes)
}

pub fn load_idx_labels(path: impl AsRef<Path>) -> Result<Vec<u8>> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    parse_idx_labels(&bytes)
}

pub fn encode_idx_images(images: &[GrayImage]) -> Vec<u8> {
    let mut out = Vec::with_capacity(16 + images.len() * PIXELS);
    out.extend_from_slice(&IMAGE_MAGIC.to_be_bytes());
    out.extend_from_slice(&(images.len() as u32).to_be_bytes());
    out.extend_from_slice(&(SIDE as u32).to_be_bytes());
    out.extend_from_slice(&(SIDE as u32).to_be_bytes());
    for img in images {
        out.extend_from_slice(img.pixels());
    }
    out
}

pub fn encode_idx_labels(labels: &[u8]) -> Vec<u8> {
    let mut out = Vec::with_capacity(8 + labels.len());
    out.extend_from_slice(&LABEL_MAGIC.to_be_bytes());
    out.extend_from_slice(&(labels.len() as u32).to_be_bytes());
    out.extend_from_slice(labels);
    out
}

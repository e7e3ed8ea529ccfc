//! Image containers and everything that reads them from disk: IDX dataset
//! files, binary PGM font templates, and the seeded per-digit split.

mod idx;
mod pgm;
mod split;
mod templates;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use idx::{encode_idx_images, encode_idx_labels, load_idx_images, load_idx_labels, parse_idx_images, parse_idx_labels};
pub use pgm::{encode_pgm, load_pgm, parse_pgm, write_pgm};
pub use split::{split_dataset, DatasetSplit};
pub use templates::{load_templates, FontTemplate, TemplateSet};

/// Side length of every dataset image and font template.
pub const SIDE: usize = 28;
/// Pixel count of a `SIDE`x`SIDE` raster.
pub const PIXELS: usize = SIDE * SIDE;
/// Number of digit classes.
pub const DIGITS: usize = 10;

/// Row-major 8-bit grayscale raster. Dataset images and templates are always
/// 28x28; other sizes exist only so the similarity code can be exercised on
/// arbitrary equal-sized pairs.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GrayImage {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 || pixels.len() != width * height {
            return Err(Error::Dimension(format!(
                "{} pixels cannot fill a {width}x{height} raster",
                pixels.len()
            )));
        }
        Ok(GrayImage {
            width,
            height,
            pixels,
        })
    }

    /// A 28x28 image from exactly 784 row-major bytes.
    pub fn from_pixels(pixels: Vec<u8>) -> Result<Self> {
        Self::new(SIDE, SIDE, pixels)
    }

    pub fn filled(width: usize, height: usize, value: u8) -> Self {
        GrayImage {
            width,
            height,
            pixels: vec![value; width * height],
        }
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> u8) -> Self {
        let mut pixels = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                pixels.push(f(x, y));
            }
        }
        GrayImage {
            width,
            height,
            pixels,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.pixels[y * self.width + x]
    }

    pub fn into_pixels(self) -> Vec<u8> {
        self.pixels
    }

    pub fn same_shape(&self, other: &GrayImage) -> bool {
        self.width == other.width && self.height == other.height
    }
}

/// A dataset image, its digit, and its record position in the source file.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LabeledImage {
    pub image: GrayImage,
    pub label: u8,
    pub index: usize,
}

impl LabeledImage {
    pub fn new(image: GrayImage, label: u8, index: usize) -> Result<Self> {
        if label as usize >= DIGITS {
            return Err(Error::LabelRange { index, value: label });
        }
        Ok(LabeledImage {
            image,
            label,
            index,
        })
    }
}

/// Pairs image and label files record by record.
pub fn zip_labels(images: Vec<GrayImage>, labels: &[u8]) -> Result<Vec<LabeledImage>> {
    if images.len() != labels.len() {
        return Err(Error::Format(format!(
            "{} images but {} labels",
            images.len(),
            labels.len()
        )));
    }
    images
        .into_iter()
        .zip(labels)
        .enumerate()
        .map(|(index, (image, &label))| LabeledImage::new(image, label, index))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_wrong_pixel_count() {
        assert!(matches!(
            GrayImage::from_pixels(vec![0; 783]),
            Err(Error::Dimension(_))
        ));
        assert!(GrayImage::from_pixels(vec![0; PIXELS]).is_ok());
    }

    #[test]
    fn label_must_be_a_digit() {
        let img = GrayImage::filled(SIDE, SIDE, 0);
        assert!(LabeledImage::new(img.clone(), 9, 0).is_ok());
        assert!(matches!(
            LabeledImage::new(img, 10, 4),
            Err(Error::LabelRange { index: 4, value: 10 })
        ));
    }

    #[test]
    fn zip_requires_equal_lengths() {
        let imgs = vec![GrayImage::filled(SIDE, SIDE, 1); 2];
        assert!(zip_labels(imgs.clone(), &[1]).is_err());
        let zipped = zip_labels(imgs, &[1, 2]).unwrap();
        assert_eq!(zipped[1].index, 1);
        assert_eq!(zipped[1].label, 2);
    }
}

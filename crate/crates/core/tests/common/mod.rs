//! Test-only reference implementations. Nothing here calls into the
//! library's SSIM or selection code paths.
#![allow(dead_code)]

use std::path::PathBuf;

use digit_reward::imagery::{FontTemplate, GrayImage, LabeledImage, SIDE};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn repo_root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

pub fn random_image(rng: &mut ChaCha8Rng) -> GrayImage {
    GrayImage::from_fn(SIDE, SIDE, |_, _| rng.gen())
}

/// Sparse bright strokes on black, closer to digit images than uniform noise.
pub fn random_sparse_image(rng: &mut ChaCha8Rng) -> GrayImage {
    let density: f64 = rng.gen_range(0.05..0.4);
    GrayImage::from_fn(SIDE, SIDE, |_, _| {
        if rng.gen_bool(density) {
            rng.gen_range(128..=255)
        } else {
            0
        }
    })
}

pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Per-window SSIM with a full 2-D Gaussian and two-pass moments, averaged
/// over every fully interior window.
pub fn brute_windowed_ssim(x: &GrayImage, y: &GrayImage, radius: usize, sigma: f64, k1: f64, k2: f64, range: f64) -> f64 {
    let side = 2 * radius + 1;
    let mut kernel = vec![vec![0.0f64; side]; side];
    let mut total = 0.0;
    for (dy, row) in kernel.iter_mut().enumerate() {
        for (dx, w) in row.iter_mut().enumerate() {
            let ry = dy as f64 - radius as f64;
            let rx = dx as f64 - radius as f64;
            *w = (-(rx * rx + ry * ry) / (2.0 * sigma * sigma)).exp();
            total += *w;
        }
    }
    for row in kernel.iter_mut() {
        for w in row.iter_mut() {
            *w /= total;
        }
    }
    let c1 = (k1 * range) * (k1 * range);
    let c2 = (k2 * range) * (k2 * range);
    let mut sum = 0.0;
    let mut windows = 0;
    for top in 0..=(x.height() - side) {
        for left in 0..=(x.width() - side) {
            let mut mx = 0.0;
            let mut my = 0.0;
            for dy in 0..side {
                for dx in 0..side {
                    let w = kernel[dy][dx];
                    mx += w * x.get(left + dx, top + dy) as f64;
                    my += w * y.get(left + dx, top + dy) as f64;
                }
            }
            let mut vx = 0.0;
            let mut vy = 0.0;
            let mut cxy = 0.0;
            for dy in 0..side {
                for dx in 0..side {
                    let w = kernel[dy][dx];
                    let a = x.get(left + dx, top + dy) as f64 - mx;
                    let b = y.get(left + dx, top + dy) as f64 - my;
                    vx += w * a * a;
                    vy += w * b * b;
                    cxy += w * a * b;
                }
            }
            sum += ((2.0 * mx * my + c1) * (2.0 * cxy + c2)) / ((mx * mx + my * my + c1) * (vx + vy + c2));
            windows += 1;
        }
    }
    sum / windows as f64
}

/// Straight-line replay of the selection procedure: fonts seed the pool;
/// each round scores all remaining candidates against the pool frozen at
/// round start, keeps those strictly above the threshold, and records each
/// pick's mean similarity against the fonts alone.
///
/// Returns `(source_index, round, font_similarity)` in selection order.
pub fn replay_selection(
    candidates: &[LabeledImage],
    fonts: &[FontTemplate],
    threshold: f64,
    rounds: u32,
    similarity: impl Fn(&GrayImage, &GrayImage) -> f64,
) -> Vec<(usize, u32, f64)> {
    let mut pool: Vec<GrayImage> = fonts.iter().map(|f| f.image.clone()).collect();
    let mut remaining: Vec<LabeledImage> = candidates.to_vec();
    let mut picked = Vec::new();
    for round in 1..=rounds {
        let frozen = pool.clone();
        let mut keep = Vec::new();
        for cand in &remaining {
            let mut total = 0.0;
            for member in &frozen {
                total += similarity(&cand.image, member);
            }
            let mean = total / frozen.len() as f64;
            if mean > threshold {
                let mut font_total = 0.0;
                for f in fonts {
                    font_total += similarity(&cand.image, &f.image);
                }
                picked.push((cand.index, round, font_total / fonts.len() as f64));
                pool.push(cand.image.clone());
            } else {
                keep.push(cand.clone());
            }
        }
        remaining = keep;
    }
    picked
}

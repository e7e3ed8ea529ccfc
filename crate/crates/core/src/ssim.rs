//! Structural similarity between two equally sized grayscale images.
//!
//! Two forms are provided. [`ssim_global`] applies the SSIM expression once to
//! whole-image statistics. [`ssim_windowed`] averages the same expression over
//! every Gaussian-weighted window that lies fully inside the image (no
//! padding), as in the usual image-quality formulation with an 11x11 window
//! and sigma 1.5.
//!
//! Statistics are population moments (divide by N) on raw intensities, so
//! the stabilising constants are `c1 = (k1 L)^2` and `c2 = (k2 L)^2` with
//! `L = 255`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imagery::GrayImage;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SsimMode {
    Global,
    #[default]
    Windowed,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SsimParams {
    pub dynamic_range: f64,
    pub k1: f64,
    pub k2: f64,
    pub mode: SsimMode,
    /// Windowed mode only; the window side is `2 * radius + 1`.
    pub window_radius: usize,
    /// Windowed mode only.
    pub window_sigma: f64,
}

impl Default for SsimParams {
    fn default() -> Self {
        SsimParams {
            dynamic_range: 255.0,
            k1: 0.01,
            k2: 0.03,
            mode: SsimMode::Windowed,
            window_radius: 5,
            window_sigma: 1.5,
        }
    }
}

impl SsimParams {
    pub fn global() -> Self {
        SsimParams {
            mode: SsimMode::Global,
            ..Self::default()
        }
    }

    pub fn c1(&self) -> f64 {
        (self.k1 * self.dynamic_range).powi(2)
    }

    pub fn c2(&self) -> f64 {
        (self.k2 * self.dynamic_range).powi(2)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if !positive(self.dynamic_range) || !positive(self.k1) || !positive(self.k2) {
            return Err(Error::Config(format!(
                "SSIM constants must be positive (L={}, k1={}, k2={})",
                self.dynamic_range, self.k1, self.k2
            )));
        }
        if self.mode == SsimMode::Windowed && !positive(self.window_sigma) {
            return Err(Error::Config(format!(
                "window sigma {} must be positive",
                self.window_sigma
            )));
        }
        Ok(())
    }
}

/// Whole-image population moments of a pair.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ImageStats {
    pub mu_x: f64,
    pub mu_y: f64,
    pub var_x: f64,
    pub var_y: f64,
    pub cov_xy: f64,
}

fn check_shapes(x: &GrayImage, y: &GrayImage) -> Result<()> {
    if !x.same_shape(y) {
        return Err(Error::Dimension(format!(
            "{}x{} vs {}x{}",
            x.width(),
            x.height(),
            y.width(),
            y.height()
        )));
    }
    Ok(())
}

fn mean(values: &[u8]) -> f64 {
    values.iter().map(|&v| v as f64).sum::<f64>() / values.len() as f64
}

fn central_product(a: &[u8], mu_a: f64, b: &[u8], mu_b: f64) -> f64 {
    a.iter()
        .zip(b)
        .map(|(&p, &q)| (p as f64 - mu_a) * (q as f64 - mu_b))
        .sum::<f64>()
        / a.len() as f64
}

pub fn compute_stats(x: &GrayImage, y: &GrayImage) -> Result<ImageStats> {
    check_shapes(x, y)?;
    let (px, py) = (x.pixels(), y.pixels());
    let mu_x = mean(px);
    let mu_y = mean(py);
    Ok(ImageStats {
        mu_x,
        mu_y,
        var_x: central_product(px, mu_x, px, mu_x),
        var_y: central_product(py, mu_y, py, mu_y),
        cov_xy: central_product(px, mu_x, py, mu_y),
    })
}

#[inline]
fn ssim_term(mu_x: f64, mu_y: f64, var_x: f64, var_y: f64, cov: f64, c1: f64, c2: f64) -> f64 {
    ((2.0 * mu_x * mu_y + c1) * (2.0 * cov + c2))
        / ((mu_x * mu_x + mu_y * mu_y + c1) * (var_x + var_y + c2))
}

/// The SSIM expression evaluated on precomputed statistics.
pub fn ssim_from_stats(stats: &ImageStats, params: &SsimParams) -> f64 {
    ssim_term(
        stats.mu_x,
        stats.mu_y,
        stats.var_x,
        stats.var_y,
        stats.cov_xy,
        params.c1(),
        params.c2(),
    )
}

pub fn ssim_global(x: &GrayImage, y: &GrayImage, params: &SsimParams) -> Result<f64> {
    Ok(ssim_from_stats(&compute_stats(x, y)?, params))
}

/// Normalised separable window weights. The 2-D weight at `(i, j)` is
/// `taps[i] * taps[j]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Kernel {
    taps: Vec<f64>,
}

impl Kernel {
    pub fn gaussian(radius: usize, sigma: f64) -> Self {
        let raw: Vec<f64> = (0..=2 * radius)
            .map(|i| {
                let d = i as f64 - radius as f64;
                (-(d * d) / (2.0 * sigma * sigma)).exp()
            })
            .collect();
        let total: f64 = raw.iter().sum();
        Kernel {
            taps: raw.into_iter().map(|w| w / total).collect(),
        }
    }

    pub fn uniform(side: usize) -> Self {
        Kernel {
            taps: vec![1.0 / side as f64; side],
        }
    }

    pub fn side(&self) -> usize {
        self.taps.len()
    }

    pub fn taps(&self) -> &[f64] {
        &self.taps
    }

    /// Weight of window offset `(dx, dy)`.
    pub fn weight(&self, dx: usize, dy: usize) -> f64 {
        self.taps[dx] * self.taps[dy]
    }
}

pub fn ssim_windowed(x: &GrayImage, y: &GrayImage, params: &SsimParams) -> Result<f64> {
    let kernel = Kernel::gaussian(params.window_radius, params.window_sigma);
    ssim_windowed_with_kernel(x, y, params, &kernel)
}

pub fn ssim_windowed_with_kernel(
    x: &GrayImage,
    y: &GrayImage,
    params: &SsimParams,
    kernel: &Kernel,
) -> Result<f64> {
    check_shapes(x, y)?;
    let a = Prepared::windowed(x, kernel)?;
    let b = Prepared::windowed(y, kernel)?;
    Ok(windowed_compare(&a, &b, kernel, params.c1(), params.c2()))
}

/// Dispatches on `params.mode`.
pub fn ssim(x: &GrayImage, y: &GrayImage, params: &SsimParams) -> Result<f64> {
    match params.mode {
        SsimMode::Global => ssim_global(x, y, params),
        SsimMode::Windowed => ssim_windowed(x, y, params),
    }
}

/// Per-image moments that do not depend on the comparison partner.
#[derive(Clone, Debug)]
pub struct Prepared {
    width: usize,
    height: usize,
    values: Vec<f64>,
    raw: Vec<u8>,
    /// Global: one entry. Windowed: one per valid window, raster order.
    mu: Vec<f64>,
    /// Global: central variance. Windowed: weighted mean of squares.
    second: Vec<f64>,
}

impl Prepared {
    fn global(image: &GrayImage) -> Self {
        let raw = image.pixels();
        let mu = mean(raw);
        Prepared {
            width: image.width(),
            height: image.height(),
            values: raw.iter().map(|&v| v as f64).collect(),
            raw: raw.to_vec(),
            mu: vec![mu],
            second: vec![central_product(raw, mu, raw, mu)],
        }
    }

    fn windowed(image: &GrayImage, kernel: &Kernel) -> Result<Self> {
        let (width, height) = (image.width(), image.height());
        if kernel.side() > width || kernel.side() > height {
            return Err(Error::Window {
                side: kernel.side(),
                width,
                height,
            });
        }
        let values: Vec<f64> = image.pixels().iter().map(|&v| v as f64).collect();
        let squares: Vec<f64> = values.iter().map(|v| v * v).collect();
        Ok(Prepared {
            width,
            height,
            mu: filter_valid(&values, width, height, kernel),
            second: filter_valid(&squares, width, height, kernel),
            raw: image.pixels().to_vec(),
            values,
        })
    }
}

/// Separable weighted sum over every fully interior window, raster order.
fn filter_valid(plane: &[f64], width: usize, height: usize, kernel: &Kernel) -> Vec<f64> {
    let taps = kernel.taps();
    let side = taps.len();
    let out_w = width - side + 1;
    let out_h = height - side + 1;
    let mut rows = vec![0.0; out_w * height];
    for y in 0..height {
        let line = &plane[y * width..(y + 1) * width];
        for x in 0..out_w {
            rows[y * out_w + x] = taps
                .iter()
                .zip(&line[x..x + side])
                .map(|(t, v)| t * v)
                .sum();
        }
    }
    let mut out = vec![0.0; out_w * out_h];
    for y in 0..out_h {
        for x in 0..out_w {
            out[y * out_w + x] = taps
                .iter()
                .enumerate()
                .map(|(k, t)| t * rows[(y + k) * out_w + x])
                .sum();
        }
    }
    out
}

fn windowed_compare(a: &Prepared, b: &Prepared, kernel: &Kernel, c1: f64, c2: f64) -> f64 {
    let products: Vec<f64> = a.values.iter().zip(&b.values).map(|(p, q)| p * q).collect();
    let cross = filter_valid(&products, a.width, a.height, kernel);
    let total: f64 = (0..cross.len())
        .map(|i| {
            let (mu_x, mu_y) = (a.mu[i], b.mu[i]);
            ssim_term(
                mu_x,
                mu_y,
                a.second[i] - mu_x * mu_x,
                b.second[i] - mu_y * mu_y,
                cross[i] - mu_x * mu_y,
                c1,
                c2,
            )
        })
        .sum();
    total / cross.len() as f64
}

/// SSIM evaluator that caches per-image moments, for scoring one image
/// against many.
#[derive(Clone, Debug)]
pub struct Ssim {
    params: SsimParams,
    kernel: Option<Kernel>,
}

impl Ssim {
    pub fn new(params: SsimParams) -> Result<Self> {
        params.validate()?;
        let kernel = match params.mode {
            SsimMode::Global => None,
            SsimMode::Windowed => Some(Kernel::gaussian(params.window_radius, params.window_sigma)),
        };
        Ok(Ssim { params, kernel })
    }

    pub fn params(&self) -> &SsimParams {
        &self.params
    }

    pub fn prepare(&self, image: &GrayImage) -> Result<Prepared> {
        match &self.kernel {
            None => Ok(Prepared::global(image)),
            Some(kernel) => Prepared::windowed(image, kernel),
        }
    }

    pub fn compare(&self, a: &Prepared, b: &Prepared) -> Result<f64> {
        if a.width != b.width || a.height != b.height {
            return Err(Error::Dimension(format!(
                "{}x{} vs {}x{}",
                a.width, a.height, b.width, b.height
            )));
        }
        let (c1, c2) = (self.params.c1(), self.params.c2());
        Ok(match &self.kernel {
            None => {
                let (mu_x, mu_y) = (a.mu[0], b.mu[0]);
                let cov = central_product(&a.raw, mu_x, &b.raw, mu_y);
                ssim_term(mu_x, mu_y, a.second[0], b.second[0], cov, c1, c2)
            }
            Some(kernel) => windowed_compare(a, b, kernel, c1, c2),
        })
    }

    pub fn similarity(&self, x: &GrayImage, y: &GrayImage) -> Result<f64> {
        check_shapes(x, y)?;
        self.compare(&self.prepare(x)?, &self.prepare(y)?)
    }
}

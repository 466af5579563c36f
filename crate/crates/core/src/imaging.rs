//! Image buffers and the few pixel operations the appearance models share.

use alloc::vec;
use alloc::vec::Vec;

use crate::geometry::BoundingBox;
use crate::math;
use crate::{Error, Result};

/// Row-major 8-bit image with 1 (gray) or 3 (R, G, B) interleaved channels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Image {
    width: usize,
    height: usize,
    channels: usize,
    data: Vec<u8>,
}

impl Image {
    pub fn new(width: usize, height: usize, channels: usize, data: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::ZeroDimension { width, height });
        }
        if channels != 1 && channels != 3 {
            return Err(Error::UnsupportedChannels(channels));
        }
        let expected = width * height * channels;
        if data.len() != expected {
            return Err(Error::DataLength {
                expected,
                actual: data.len(),
            });
        }
        Ok(Self {
            width,
            height,
            channels,
            data,
        })
    }

    /// Image where every pixel has the given channel values.
    pub fn filled(width: usize, height: usize, pixel: &[u8]) -> Result<Self> {
        let data = pixel
            .iter()
            .copied()
            .cycle()
            .take(width * height * pixel.len())
            .collect();
        Self::new(width, height, pixel.len(), data)
    }

    /// Gray image from a per-pixel function of `(x, y)`.
    pub fn from_gray_fn(width: usize, height: usize, f: impl Fn(usize, usize) -> u8) -> Result<Self> {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self::new(width, height, 1, data)
    }

    /// RGB image from a per-pixel function of `(x, y)`.
    pub fn from_rgb_fn(width: usize, height: usize, f: impl Fn(usize, usize) -> [u8; 3]) -> Result<Self> {
        let mut data = Vec::with_capacity(width * height * 3);
        for y in 0..height {
            for x in 0..width {
                data.extend_from_slice(&f(x, y));
            }
        }
        Self::new(width, height, 3, data)
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

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn into_data(self) -> Vec<u8> {
        self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize, channel: usize) -> u8 {
        self.data[(y * self.width + x) * self.channels + channel]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, channel: usize, value: u8) {
        self.data[(y * self.width + x) * self.channels + channel] = value;
    }

    pub fn pixel(&self, x: usize, y: usize) -> &[u8] {
        let start = (y * self.width + x) * self.channels;
        &self.data[start..start + self.channels]
    }
}

/// BT.601 luma. One-channel inputs are returned unchanged.
pub fn to_grayscale(img: &Image) -> Image {
    if img.channels == 1 {
        return img.clone();
    }
    let data = img
        .data
        .chunks_exact(3)
        .map(|px| {
            let luma = 0.299 * f64::from(px[0]) + 0.587 * f64::from(px[1]) + 0.114 * f64::from(px[2]);
            math::round(luma).clamp(0.0, 255.0) as u8
        })
        .collect();
    Image {
        width: img.width,
        height: img.height,
        channels: 1,
        data,
    }
}

/// Bilinearly resample the region under `bbox` to a `tw x th` patch.
///
/// Sample positions that fall outside the frame are clamped to the nearest
/// edge pixel.
pub fn crop_resize(img: &Image, bbox: &BoundingBox, tw: usize, th: usize) -> Result<Image> {
    if tw == 0 || th == 0 {
        return Err(Error::ZeroDimension { width: tw, height: th });
    }
    if !(bbox.width > 0.0 && bbox.height > 0.0) || !bbox.is_finite() {
        return Err(Error::DegenerateBox {
            width: bbox.width,
            height: bbox.height,
        });
    }
    if !bbox.intersects_frame(img.width, img.height) {
        return Err(Error::BoxOutsideFrame {
            width: img.width,
            height: img.height,
        });
    }

    let xs = axis_samples(bbox.x, bbox.width, tw, img.width);
    let ys = axis_samples(bbox.y, bbox.height, th, img.height);
    let ch = img.channels;
    let mut data = Vec::with_capacity(tw * th * ch);
    for &(y0, y1, fy) in &ys {
        for &(x0, x1, fx) in &xs {
            for c in 0..ch {
                let p00 = f64::from(img.get(x0, y0, c));
                let p10 = f64::from(img.get(x1, y0, c));
                let p01 = f64::from(img.get(x0, y1, c));
                let p11 = f64::from(img.get(x1, y1, c));
                let top = p00 + (p10 - p00) * fx;
                let bottom = p01 + (p11 - p01) * fx;
                let v = top + (bottom - top) * fy;
                data.push(math::round(v).clamp(0.0, 255.0) as u8);
            }
        }
    }
    Image::new(tw, th, ch, data)
}

// (lower index, upper index, fraction) for each output sample along one axis.
fn axis_samples(start: f64, extent: f64, out: usize, size: usize) -> Vec<(usize, usize, f64)> {
    let step = extent / out as f64;
    let max = (size - 1) as f64;
    (0..out)
        .map(|i| {
            let s = (start + (i as f64 + 0.5) * step - 0.5).clamp(0.0, max);
            let lo = math::floor(s);
            let i0 = lo as usize;
            let i1 = (i0 + 1).min(size - 1);
            (i0, i1, s - lo)
        })
        .collect()
}

/// Isotropic weights over a patch, peaked at its geometric center.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightMask {
    width: usize,
    height: usize,
    weights: Vec<f64>,
}

impl WeightMask {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    #[inline]
    pub fn at(&self, x: usize, y: usize) -> f64 {
        self.weights[y * self.width + x]
    }
}

/// Gaussian mask with `sigma = sigma_frac * min(w, h)`, normalized to sum 1.
///
/// Degenerate inputs (zero size, non-positive sigma) are clamped to a 1x1
/// mask and a tiny positive sigma respectively.
pub fn gaussian_weight_mask(w: usize, h: usize, sigma_frac: f64) -> WeightMask {
    let (w, h) = (w.max(1), h.max(1));
    let sigma = (sigma_frac * w.min(h) as f64).max(f64::MIN_POSITIVE);
    let cx = (w as f64 - 1.0) / 2.0;
    let cy = (h as f64 - 1.0) / 2.0;
    let denom = 2.0 * sigma * sigma;
    let mut weights = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            let dx = x as f64 - cx;
            let dy = y as f64 - cy;
            weights[y * w + x] = math::exp(-(dx * dx + dy * dy) / denom);
        }
    }
    let total: f64 = weights.iter().sum();
    for v in &mut weights {
        *v /= total;
    }
    WeightMask {
        width: w,
        height: h,
        weights,
    }
}

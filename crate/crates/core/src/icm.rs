//! Center-weighted RGB histogram template.

use alloc::vec;
use alloc::vec::Vec;

use crate::geometry::BoundingBox;
use crate::imaging::{crop_resize, Image, WeightMask};
use crate::math;
use crate::{Error, Result};

/// Side of the normalized patch both short-term templates are built from.
pub const TEMPLATE_SIZE: usize = 32;
pub const DEFAULT_BINS: usize = 16;
/// Default partial-update blend rate.
pub const DEFAULT_RHO: f64 = 0.125;

const CHANNELS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UpdateMode {
    Partial,
    Full,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IcmHistogram {
    bins: usize,
    /// `3 * bins` values, channel-major; each channel sums to 1.
    values: Vec<f64>,
    template_dims: (u32, u32),
}

impl IcmHistogram {
    /// Build directly from per-channel bin masses (each channel is normalized).
    pub fn from_values(bins: usize, mut values: Vec<f64>, template_dims: (u32, u32)) -> Result<Self> {
        if bins == 0 || values.len() != CHANNELS * bins {
            return Err(Error::BinMismatch(bins, values.len() / CHANNELS));
        }
        normalize_channels(&mut values, bins);
        Ok(Self {
            bins,
            values,
            template_dims,
        })
    }

    pub fn bins(&self) -> usize {
        self.bins
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn channel(&self, c: usize) -> &[f64] {
        &self.values[c * self.bins..(c + 1) * self.bins]
    }

    pub fn template_dims(&self) -> (u32, u32) {
        self.template_dims
    }
}

fn normalize_channels(values: &mut [f64], bins: usize) {
    for chunk in values.chunks_mut(bins) {
        let total: f64 = chunk.iter().sum();
        if total > 0.0 {
            for v in chunk.iter_mut() {
                *v /= total;
            }
        } else {
            // no mass at all: fall back to uniform so the histogram stays valid
            chunk.fill(1.0 / bins as f64);
        }
    }
}

/// Histogram of the box region resampled to the mask size; every pixel adds
/// its mask weight to the bin of each channel.
pub fn build_icm(img: &Image, bbox: &BoundingBox, bins: usize, mask: &WeightMask) -> Result<IcmHistogram> {
    if img.channels() != CHANNELS {
        return Err(Error::ChannelMismatch {
            expected: CHANNELS,
            actual: img.channels(),
        });
    }
    if !(bbox.width >= 1.0 && bbox.height >= 1.0) {
        return Err(Error::DegenerateBox {
            width: bbox.width,
            height: bbox.height,
        });
    }
    if bins == 0 || bins > 256 {
        return Err(Error::InvalidConfig("histogram bins must be in 1..=256"));
    }
    let patch = crop_resize(img, bbox, mask.width(), mask.height())?;
    let mut values = vec![0.0; CHANNELS * bins];
    for y in 0..mask.height() {
        for x in 0..mask.width() {
            let w = mask.at(x, y);
            for (c, &v) in patch.pixel(x, y).iter().enumerate() {
                values[c * bins + usize::from(v) * bins / 256] += w;
            }
        }
    }
    normalize_channels(&mut values, bins);
    Ok(IcmHistogram {
        bins,
        values,
        template_dims: bbox.rounded_dims(),
    })
}

/// Largest L2 distance between two 3-channel normalized histograms.
fn max_distance() -> f64 {
    math::sqrt(6.0)
}

/// `1 - ||model - cand||_2 / sqrt(6)`, in `[0, 1]`.
pub fn color_score(model: &IcmHistogram, cand: &IcmHistogram) -> Result<f64> {
    if model.bins != cand.bins {
        return Err(Error::BinMismatch(model.bins, cand.bins));
    }
    let sq: f64 = model
        .values
        .iter()
        .zip(&cand.values)
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    Ok((1.0 - math::sqrt(sq) / max_distance()).clamp(0.0, 1.0))
}

/// Full replacement, or a convex blend `(1 - rho) * model + rho * fresh`
/// that keeps the model's template dimensions.
pub fn update_icm(model: &IcmHistogram, fresh: &IcmHistogram, mode: UpdateMode, rho: f64) -> Result<IcmHistogram> {
    if model.bins != fresh.bins {
        return Err(Error::BinMismatch(model.bins, fresh.bins));
    }
    Ok(match mode {
        UpdateMode::Full => fresh.clone(),
        UpdateMode::Partial => {
            let mut values: Vec<f64> = model
                .values
                .iter()
                .zip(&fresh.values)
                .map(|(m, f)| (1.0 - rho) * m + rho * f)
                .collect();
            normalize_channels(&mut values, model.bins);
            IcmHistogram {
                bins: model.bins,
                values,
                template_dims: model.template_dims,
            }
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imaging::gaussian_weight_mask;
    use proptest::prelude::*;

    fn mask() -> WeightMask {
        gaussian_weight_mask(TEMPLATE_SIZE, TEMPLATE_SIZE, 0.5)
    }

    fn one_hot(bins: usize, which: [usize; 3]) -> IcmHistogram {
        let mut v = vec![0.0; 3 * bins];
        for (c, &b) in which.iter().enumerate() {
            v[c * bins + b] = 1.0;
        }
        IcmHistogram::from_values(bins, v, (10, 10)).unwrap()
    }

    fn noisy(w: usize, h: usize, seed: u32) -> Image {
        Image::from_rgb_fn(w, h, |x, y| {
            let v = (x as u32 * 2971 + y as u32 * 1013 + seed).wrapping_mul(2654435761);
            [(v >> 8) as u8, (v >> 16) as u8, (v >> 24) as u8]
        })
        .unwrap()
    }

    #[test]
    fn uniform_gray_fills_one_bin() {
        let img = Image::filled(40, 30, &[128, 128, 128]).unwrap();
        let h = build_icm(&img, &BoundingBox::new(5.0, 5.0, 20.0, 20.0), 16, &mask()).unwrap();
        for c in 0..3 {
            assert!((h.channel(c)[8] - 1.0).abs() < 1e-12);
        }
        assert_eq!(h.template_dims(), (20, 20));
    }

    #[test]
    fn channels_are_normalized() {
        let img = noisy(50, 40, 7);
        let h = build_icm(&img, &BoundingBox::new(3.5, 2.0, 30.0, 25.0), 16, &mask()).unwrap();
        for c in 0..3 {
            assert!((h.channel(c).iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn mirrored_patches_have_identical_histograms() {
        let img = noisy(32, 32, 3);
        let mirrored = Image::from_rgb_fn(32, 32, |x, y| {
            let p = img.pixel(31 - x, y);
            [p[0], p[1], p[2]]
        })
        .unwrap();
        let b = BoundingBox::new(0.0, 0.0, 32.0, 32.0);
        let a = build_icm(&img, &b, 16, &mask()).unwrap();
        let m = build_icm(&mirrored, &b, 16, &mask()).unwrap();
        for (x, y) in a.values().iter().zip(m.values()) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn build_rejects_bad_input() {
        let img = Image::filled(10, 10, &[1, 2, 3]).unwrap();
        assert!(matches!(
            build_icm(&img, &BoundingBox::new(0.0, 0.0, 0.5, 4.0), 16, &mask()),
            Err(Error::DegenerateBox { .. })
        ));
        let gray = Image::filled(10, 10, &[1]).unwrap();
        assert!(build_icm(&gray, &BoundingBox::new(0.0, 0.0, 4.0, 4.0), 16, &mask()).is_err());
    }

    #[test]
    fn score_examples() {
        let a = one_hot(16, [0, 3, 5]);
        assert_eq!(color_score(&a, &a).unwrap(), 1.0);
        let b = one_hot(16, [1, 4, 6]);
        assert!(color_score(&a, &b).unwrap().abs() < 1e-12);

        // model split over two bins per channel vs all mass in one of them:
        // per channel sqrt(0.25 + 0.25), total sqrt(1.5), 1 - sqrt(1.5)/sqrt(6) = 0.5
        let mut v = vec![0.0; 48];
        for c in 0..3 {
            v[c * 16] = 0.5;
            v[c * 16 + 1] = 0.5;
        }
        let split = IcmHistogram::from_values(16, v, (1, 1)).unwrap();
        let single = one_hot(16, [0, 0, 0]);
        assert!((color_score(&split, &single).unwrap() - 0.5).abs() < 1e-12);

        let other = one_hot(8, [0, 0, 0]);
        assert_eq!(color_score(&a, &other), Err(Error::BinMismatch(16, 8)));
    }

    #[test]
    fn update_examples() {
        let model = one_hot(16, [0, 0, 0]);
        let fresh = IcmHistogram::from_values(16, one_hot(16, [1, 1, 1]).values().to_vec(), (20, 30)).unwrap();
        assert_eq!(update_icm(&model, &fresh, UpdateMode::Full, 0.125).unwrap(), fresh);
        assert_eq!(update_icm(&model, &model, UpdateMode::Partial, 0.125).unwrap(), model);
        let blended = update_icm(&model, &fresh, UpdateMode::Partial, 0.125).unwrap();
        for c in 0..3 {
            assert!((blended.channel(c)[0] - 0.875).abs() < 1e-12);
            assert!((blended.channel(c)[1] - 0.125).abs() < 1e-12);
        }
        assert_eq!(blended.template_dims(), model.template_dims());
    }

    fn arb_hist() -> impl Strategy<Value = IcmHistogram> {
        prop::collection::vec(0.0f64..1.0, 48).prop_map(|v| IcmHistogram::from_values(16, v, (8, 8)).unwrap())
    }

    proptest! {
        #[test]
        fn score_is_symmetric_and_bounded(a in arb_hist(), b in arb_hist()) {
            let ab = color_score(&a, &b).unwrap();
            prop_assert!((ab - color_score(&b, &a).unwrap()).abs() < 1e-12);
            prop_assert!((0.0..=1.0).contains(&ab));
            prop_assert!((color_score(&a, &a).unwrap() - 1.0).abs() < 1e-9);
        }

        #[test]
        fn partial_update_contracts_toward_model(a in arb_hist(), b in arb_hist()) {
            let blended = update_icm(&a, &b, UpdateMode::Partial, DEFAULT_RHO).unwrap();
            prop_assert!(color_score(&a, &blended).unwrap() + 1e-12 >= color_score(&a, &b).unwrap());
            prop_assert!(blended.values().iter().all(|&v| v >= 0.0));
            for c in 0..3 {
                prop_assert!((blended.channel(c).iter().sum::<f64>() - 1.0).abs() < 1e-9);
            }
        }
    }
}

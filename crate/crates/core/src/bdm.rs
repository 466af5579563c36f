//! Local binary similarity pattern (LBSP) template.
//!
//! Each cell of a normalized gray patch gets a 16-bit code. Bit `i` is set when
//! the `i`-th sample of the 5x5 pattern below differs from the center pixel by
//! at most the threshold:
//!
//! ```text
//!  0 . 1 . 2
//!  . 3 4 5 .
//!  6 7 * 8 9
//!  . a b c .
//!  d . e . f
//! ```
//!
//! (hex digits are bit indices, `*` is the center pixel.)

use alloc::vec::Vec;

use crate::icm::{UpdateMode, TEMPLATE_SIZE};
use crate::imaging::Image;
use crate::{Error, Result};

pub const DEFAULT_THRESHOLD: u8 = 30;
/// Default fraction of cells refreshed by a partial update.
pub const DEFAULT_RHO: f64 = 0.10;

/// Sample offsets `(dx, dy)` in bit order.
pub const LBSP_PATTERN: [(i32, i32); 16] = [
    (-2, -2),
    (0, -2),
    (2, -2),
    (-1, -1),
    (0, -1),
    (1, -1),
    (-2, 0),
    (-1, 0),
    (1, 0),
    (2, 0),
    (-1, 1),
    (0, 1),
    (1, 1),
    (-2, 2),
    (0, 2),
    (2, 2),
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BdmGrid {
    width: usize,
    height: usize,
    codes: Vec<u16>,
    threshold: u8,
    /// Residue class refreshed by the next partial update.
    next_partial: usize,
}

impl BdmGrid {
    pub fn from_codes(width: usize, height: usize, codes: Vec<u16>, threshold: u8) -> Result<Self> {
        if codes.len() != width * height {
            return Err(Error::DataLength {
                expected: width * height,
                actual: codes.len(),
            });
        }
        Ok(Self {
            width,
            height,
            codes,
            threshold: threshold.max(1),
            next_partial: 0,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn codes(&self) -> &[u16] {
        &self.codes
    }

    pub fn threshold(&self) -> u8 {
        self.threshold
    }

    fn check_dims(&self, other: &BdmGrid) -> Result<()> {
        if self.width != other.width || self.height != other.height {
            return Err(Error::GridMismatch(self.width, self.height, other.width, other.height));
        }
        Ok(())
    }
}

/// LBSP codes of a `TEMPLATE_SIZE x TEMPLATE_SIZE` gray patch. Samples past
/// the patch border are clamped to the edge.
pub fn compute_lbsp(gray_patch: &Image, threshold: u8) -> Result<BdmGrid> {
    if gray_patch.channels() != 1 {
        return Err(Error::ChannelMismatch {
            expected: 1,
            actual: gray_patch.channels(),
        });
    }
    let (w, h) = (gray_patch.width(), gray_patch.height());
    if w != TEMPLATE_SIZE || h != TEMPLATE_SIZE {
        return Err(Error::PatchSize {
            expected: TEMPLATE_SIZE,
            width: w,
            height: h,
        });
    }
    let threshold = threshold.max(1);
    let mut codes = Vec::with_capacity(w * h);
    for y in 0..h as i32 {
        for x in 0..w as i32 {
            let center = i32::from(gray_patch.get(x as usize, y as usize, 0));
            let mut code = 0u16;
            for (bit, &(dx, dy)) in LBSP_PATTERN.iter().enumerate() {
                let sx = (x + dx).clamp(0, w as i32 - 1) as usize;
                let sy = (y + dy).clamp(0, h as i32 - 1) as usize;
                let sample = i32::from(gray_patch.get(sx, sy, 0));
                if (sample - center).abs() <= i32::from(threshold) {
                    code |= 1 << bit;
                }
            }
            codes.push(code);
        }
    }
    Ok(BdmGrid {
        width: w,
        height: h,
        codes,
        threshold,
        next_partial: 0,
    })
}

/// `1 - differing_bits / (16 * cells)`.
pub fn binary_score(model: &BdmGrid, cand: &BdmGrid) -> Result<f64> {
    model.check_dims(cand)?;
    let differing: u64 = model
        .codes
        .iter()
        .zip(&cand.codes)
        .map(|(a, b)| u64::from((a ^ b).count_ones()))
        .sum();
    let total = 16 * model.codes.len() as u64;
    if total == 0 {
        return Ok(1.0);
    }
    Ok(1.0 - differing as f64 / total as f64)
}

/// Full replacement, or refresh of every `round(1 / rho)`-th cell starting at
/// a residue that advances by one per partial update.
pub fn update_bdm(model: &BdmGrid, fresh: &BdmGrid, mode: UpdateMode, rho: f64) -> Result<BdmGrid> {
    model.check_dims(fresh)?;
    Ok(match mode {
        UpdateMode::Full => BdmGrid {
            next_partial: model.next_partial,
            ..fresh.clone()
        },
        UpdateMode::Partial => {
            let stride = partial_stride(rho);
            let offset = model.next_partial % stride;
            let mut codes = model.codes.clone();
            for i in (offset..codes.len()).step_by(stride) {
                codes[i] = fresh.codes[i];
            }
            BdmGrid {
                codes,
                next_partial: (offset + 1) % stride,
                ..model.clone()
            }
        }
    })
}

fn partial_stride(rho: f64) -> usize {
    if rho.is_nan() || rho <= 0.0 {
        return usize::MAX;
    }
    (crate::math::round(1.0 / rho) as usize).max(1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn patch(f: impl Fn(usize, usize) -> u8) -> Image {
        Image::from_gray_fn(TEMPLATE_SIZE, TEMPLATE_SIZE, f).unwrap()
    }

    fn grid(codes: Vec<u16>, w: usize, h: usize) -> BdmGrid {
        BdmGrid::from_codes(w, h, codes, DEFAULT_THRESHOLD).unwrap()
    }

    #[test]
    fn uniform_patch_is_all_similar() {
        let g = compute_lbsp(&patch(|_, _| 77), 30).unwrap();
        assert!(g.codes().iter().all(|&c| c == 0xFFFF));
    }

    #[test]
    fn isolated_bright_pixel_has_empty_code() {
        let g = compute_lbsp(&patch(|x, y| if (x, y) == (10, 12) { 255 } else { 0 }), 30).unwrap();
        assert_eq!(g.codes()[12 * TEMPLATE_SIZE + 10], 0x0000);
        let again = compute_lbsp(&patch(|x, y| if (x, y) == (10, 12) { 255 } else { 0 }), 30).unwrap();
        assert_eq!(g, again);
    }

    #[test]
    fn wrong_patch_is_rejected() {
        let small = Image::filled(16, 16, &[0]).unwrap();
        assert!(matches!(compute_lbsp(&small, 30), Err(Error::PatchSize { .. })));
        let rgb = Image::filled(32, 32, &[0, 0, 0]).unwrap();
        assert!(compute_lbsp(&rgb, 30).is_err());
    }

    #[test]
    fn score_examples() {
        let a = grid(vec![0x0F0F; 4], 2, 2);
        assert_eq!(binary_score(&a, &a).unwrap(), 1.0);
        let complement = grid(vec![0xF0F0; 4], 2, 2);
        assert_eq!(binary_score(&a, &complement).unwrap(), 0.0);
        let half = grid(vec![0x0F0F, 0x0F0F, 0xF0F0, 0xF0F0], 2, 2);
        assert_eq!(binary_score(&a, &half).unwrap(), 0.5);
        let other = grid(vec![0; 6], 3, 2);
        assert!(matches!(binary_score(&a, &other), Err(Error::GridMismatch(..))));
    }

    #[test]
    fn update_examples() {
        let model = grid(vec![0; 100], 10, 10);
        let fresh = grid(vec![0xFFFF; 100], 10, 10);
        assert_eq!(
            update_bdm(&model, &fresh, UpdateMode::Full, 0.1).unwrap().codes(),
            fresh.codes()
        );
        assert_eq!(
            update_bdm(&model, &model, UpdateMode::Partial, 0.1).unwrap().codes(),
            model.codes()
        );
        let once = update_bdm(&model, &fresh, UpdateMode::Partial, 0.1).unwrap();
        let changed = once.codes().iter().zip(model.codes()).filter(|(a, b)| a != b).count();
        assert_eq!(changed, 10);
    }

    proptest! {
        #[test]
        fn popcount_matches_bitwise_loop(
            a in prop::collection::vec(any::<u16>(), 64),
            b in prop::collection::vec(any::<u16>(), 64),
        ) {
            let (ga, gb) = (grid(a.clone(), 8, 8), grid(b.clone(), 8, 8));
            let mut differing = 0usize;
            for (x, y) in a.iter().zip(&b) {
                for bit in 0..16 {
                    if (x >> bit) & 1 != (y >> bit) & 1 {
                        differing += 1;
                    }
                }
            }
            let naive = 1.0 - differing as f64 / (16.0 * 64.0);
            prop_assert_eq!(binary_score(&ga, &gb).unwrap(), naive);
            prop_assert_eq!(binary_score(&gb, &ga).unwrap(), naive);
            prop_assert_eq!(naive == 1.0, a == b);
        }

        #[test]
        fn repeated_partial_updates_converge(
            a in prop::collection::vec(any::<u16>(), 1..200),
            seed in any::<u16>(),
        ) {
            let n = a.len();
            let model = grid(a, n, 1);
            let fresh = grid((0..n).map(|i| (i as u16).wrapping_mul(seed)).collect(), n, 1);
            let mut g = model;
            for _ in 0..10 {
                g = update_bdm(&g, &fresh, UpdateMode::Partial, DEFAULT_RHO).unwrap();
            }
            prop_assert_eq!(g.codes(), fresh.codes());
        }
    }
}

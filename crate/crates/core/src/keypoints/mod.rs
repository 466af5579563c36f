//! Scale-covariant keypoints: detection, descriptor matching and scale change.

mod sift;

use alloc::vec::Vec;

pub use sift::{detect_and_describe, DetectorConfig, DESCRIPTOR_LEN};

use crate::geometry::Point;
use crate::math;

/// Default nearest/second-nearest acceptance ratio.
pub const DEFAULT_RATIO: f32 = 0.75;

#[derive(Debug, Clone, PartialEq)]
pub struct Keypoint {
    pub x: f64,
    pub y: f64,
    /// Detection scale in frame pixels.
    pub scale: f64,
    /// L2-normalized descriptor.
    pub descriptor: Vec<f32>,
}

impl Keypoint {
    pub fn position(&self) -> Point {
        Point::new(self.x, self.y)
    }
}

/// Scale `v` to unit L2 norm in place. Returns false (leaving `v` untouched)
/// when the norm is zero or not finite.
pub fn normalize_descriptor(v: &mut [f32]) -> bool {
    let norm = math::sqrtf(v.iter().map(|a| a * a).sum());
    if !(norm > 0.0 && norm.is_finite()) {
        return false;
    }
    for a in v.iter_mut() {
        *a /= norm;
    }
    true
}

/// A model descriptor paired with a frame keypoint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Match {
    pub model_index: usize,
    pub frame_index: usize,
    /// Position of the matched frame keypoint.
    pub position: Point,
    /// L2 distance between the descriptors.
    pub distance: f32,
}

fn squared_distance(a: &[f32], b: &[f32]) -> f32 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Match every model descriptor against the frame with the ratio test, then
/// resolve collisions so each frame keypoint is used at most once.
///
/// A model descriptor is accepted when its nearest frame descriptor is closer
/// than `ratio` times the second nearest (a single frame keypoint is always
/// accepted). Collisions are resolved greedily by ascending distance. The
/// result is sorted by model index.
pub fn match_descriptors<D: AsRef<[f32]>>(frame: &[Keypoint], model: &[D], ratio: f32) -> Vec<Match> {
    if frame.is_empty() || model.is_empty() {
        return Vec::new();
    }
    let mut proposals: Vec<(f32, usize, usize)> = Vec::new();
    for (mi, desc) in model.iter().enumerate() {
        let desc = desc.as_ref();
        let mut best = (f32::INFINITY, usize::MAX);
        let mut second = f32::INFINITY;
        for (fi, kp) in frame.iter().enumerate() {
            let d = squared_distance(desc, &kp.descriptor);
            if d < best.0 {
                second = best.0;
                best = (d, fi);
            } else if d < second {
                second = d;
            }
        }
        let nearest = math::sqrtf(best.0);
        let accepted = if second.is_infinite() {
            true
        } else {
            nearest < ratio * math::sqrtf(second)
        };
        if accepted {
            proposals.push((nearest, mi, best.1));
        }
    }
    proposals.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

    let mut used = alloc::vec![false; frame.len()];
    let mut matches: Vec<Match> = proposals
        .into_iter()
        .filter_map(|(distance, model_index, frame_index)| {
            if core::mem::replace(&mut used[frame_index], true) {
                return None;
            }
            Some(Match {
                model_index,
                frame_index,
                position: frame[frame_index].position(),
                distance,
            })
        })
        .collect();
    matches.sort_by_key(|m| m.model_index);
    matches
}

/// Median ratio of current to reference pairwise distances over all pairs of
/// matches. `reference` is indexed by `Match::model_index`.
///
/// Pairs whose reference distance is below one pixel are skipped. Returns 1.0
/// when fewer than two matches (or no usable pair) are available.
pub fn estimate_scale(matches: &[Match], reference: &[Point]) -> f64 {
    if matches.len() < 2 {
        return 1.0;
    }
    let mut ratios = Vec::with_capacity(matches.len() * (matches.len() - 1) / 2);
    for (i, a) in matches.iter().enumerate() {
        for b in &matches[i + 1..] {
            let ref_dist = reference[a.model_index].distance(reference[b.model_index]);
            if ref_dist < 1.0 {
                continue;
            }
            ratios.push(a.position.distance(b.position) / ref_dist);
        }
    }
    median(&mut ratios).unwrap_or(1.0)
}

fn median(values: &mut [f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    values.sort_by(f64::total_cmp);
    let mid = values.len() / 2;
    Some(if values.len() % 2 == 1 {
        values[mid]
    } else {
        (values[mid - 1] + values[mid]) / 2.0
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use proptest::prelude::*;

    fn kp(x: f64, y: f64, descriptor: Vec<f32>) -> Keypoint {
        Keypoint {
            x,
            y,
            scale: 1.6,
            descriptor,
        }
    }

    fn matched(model_index: usize, x: f64, y: f64) -> Match {
        Match {
            model_index,
            frame_index: model_index,
            position: Point::new(x, y),
            distance: 0.0,
        }
    }

    #[test]
    fn ratio_test_accepts_and_rejects() {
        // Model at the origin; frame descriptors at distance 0.5 and 0.8.
        let frame = vec![kp(0.0, 0.0, vec![0.5, 0.0]), kp(1.0, 0.0, vec![0.0, 0.8])];
        let model = [vec![0.0f32, 0.0]];
        let m = match_descriptors(&frame, &model, 0.75);
        assert_eq!(m.len(), 1);
        assert_eq!(m[0].frame_index, 0);
        assert!((m[0].distance - 0.5).abs() < 1e-6);

        // 0.7 / 0.8 = 0.875 >= 0.75
        let frame = vec![kp(0.0, 0.0, vec![0.7, 0.0]), kp(1.0, 0.0, vec![0.0, 0.8])];
        assert!(match_descriptors(&frame, &model, 0.75).is_empty());
    }

    #[test]
    fn collisions_keep_the_closer_model() {
        let frame = vec![kp(3.0, 4.0, vec![1.0, 0.0])];
        let model = [vec![0.0f32, 1.0], vec![0.6f32, 0.8]];
        let m = match_descriptors(&frame, &model, 0.75);
        assert_eq!(m.len(), 1);
        assert_eq!(m[0].model_index, 1);
        assert_eq!(m[0].position, Point::new(3.0, 4.0));
    }

    #[test]
    fn empty_inputs() {
        let none: [Vec<f32>; 0] = [];
        assert!(match_descriptors(&[], &[vec![1.0f32]], 0.75).is_empty());
        assert!(match_descriptors(&[kp(0.0, 0.0, vec![1.0])], &none, 0.75).is_empty());
    }

    #[test]
    fn scale_of_uniform_dilation() {
        let reference = [
            Point::new(0.0, 0.0),
            Point::new(10.0, 0.0),
            Point::new(0.0, 20.0),
            Point::new(7.0, 9.0),
        ];
        let current: Vec<Match> = reference
            .iter()
            .enumerate()
            .map(|(i, p)| matched(i, 5.0 + 1.5 * p.x, -3.0 + 1.5 * p.y))
            .collect();
        assert!((estimate_scale(&current, &reference) - 1.5).abs() < 1e-12);

        let same: Vec<Match> = reference
            .iter()
            .enumerate()
            .map(|(i, p)| matched(i, p.x, p.y))
            .collect();
        assert_eq!(estimate_scale(&same, &reference), 1.0);
    }

    #[test]
    fn scale_falls_back_to_one() {
        assert_eq!(estimate_scale(&[], &[]), 1.0);
        assert_eq!(estimate_scale(&[matched(0, 1.0, 1.0)], &[Point::ORIGIN]), 1.0);
        // Only pair has a sub-pixel reference distance.
        let reference = [Point::ORIGIN, Point::new(0.5, 0.0)];
        let m = [matched(0, 0.0, 0.0), matched(1, 9.0, 0.0)];
        assert_eq!(estimate_scale(&m, &reference), 1.0);
    }

    #[test]
    fn scale_median_ignores_single_outlier() {
        let reference = [
            Point::new(0.0, 0.0),
            Point::new(10.0, 0.0),
            Point::new(0.0, 10.0),
            Point::new(10.0, 10.0),
            Point::new(5.0, 3.0),
        ];
        let s = 1.2;
        let mut m: Vec<Match> = reference
            .iter()
            .enumerate()
            .map(|(i, p)| matched(i, p.x * s, p.y * s))
            .collect();
        m[4].position = Point::new(40.0, -25.0);

        // Enumerate the ten pairwise ratios directly.
        let mut ratios = Vec::new();
        for i in 0..5 {
            for j in i + 1..5 {
                let cur = m[i].position.distance(m[j].position);
                let r = reference[i].distance(reference[j]);
                ratios.push(cur / r);
            }
        }
        ratios.sort_by(f64::total_cmp);
        let inlier_pairs = ratios.iter().filter(|r| (**r - s).abs() < 1e-12).count();
        assert_eq!(inlier_pairs, 6);
        let hand_median = (ratios[4] + ratios[5]) / 2.0;
        assert!((hand_median - s).abs() < 1e-12);
        assert!((estimate_scale(&m, &reference) - s).abs() < 1e-12);
    }

    fn arb_descriptor() -> impl Strategy<Value = Vec<f32>> {
        prop::collection::vec(-1.0f32..1.0, 4)
    }

    proptest! {
        #[test]
        fn matches_are_one_to_one_and_monotone_in_ratio(
            frame in prop::collection::vec(arb_descriptor(), 0..12),
            model in prop::collection::vec(arb_descriptor(), 0..12),
            lo in 0.1f32..1.0, hi in 0.1f32..1.0,
        ) {
            let frame: Vec<Keypoint> = frame
                .into_iter()
                .enumerate()
                .map(|(i, d)| kp(i as f64, 0.0, d))
                .collect();
            let (lo, hi) = if lo <= hi { (lo, hi) } else { (hi, lo) };
            let strict = match_descriptors(&frame, &model, lo);
            let loose = match_descriptors(&frame, &model, hi);
            prop_assert!(loose.len() <= frame.len().min(model.len()));
            prop_assert!(strict.len() <= loose.len());
            let mut models: Vec<usize> = loose.iter().map(|m| m.model_index).collect();
            let mut frames: Vec<usize> = loose.iter().map(|m| m.frame_index).collect();
            models.dedup();
            frames.sort_unstable();
            frames.dedup();
            prop_assert_eq!(models.len(), loose.len());
            prop_assert_eq!(frames.len(), loose.len());
        }

        #[test]
        fn scale_is_translation_invariant(
            pts in prop::collection::vec((-50.0f64..50.0, -50.0f64..50.0), 2..8),
            dx in -100.0f64..100.0, dy in -100.0f64..100.0, s in 0.5f64..2.0,
        ) {
            let reference: Vec<Point> = pts.iter().map(|&(x, y)| Point::new(x, y)).collect();
            let m: Vec<Match> = reference
                .iter()
                .enumerate()
                .map(|(i, p)| matched(i, p.x * s + (i as f64).sin(), p.y * s))
                .collect();
            let shifted: Vec<Match> = m
                .iter()
                .map(|mm| Match { position: mm.position + Point::new(dx, dy), ..*mm })
                .collect();
            let a = estimate_scale(&m, &reference);
            let b = estimate_scale(&shifted, &reference);
            prop_assert!((a - b).abs() <= 1e-9 * a.abs().max(1.0));
        }
    }
}

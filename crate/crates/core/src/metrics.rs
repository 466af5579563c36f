//! One-pass evaluation: precision and success curves.

use alloc::vec::Vec;

use crate::geometry::BoundingBox;
use crate::{Error, Result};

/// Largest center-error threshold of the precision curve, in pixels.
pub const PRECISION_MAX_THRESHOLD: usize = 50;
/// Number of overlap thresholds `0, 0.05, ..., 1.0`.
pub const SUCCESS_STEPS: usize = 21;

/// Intersection over union; 0 when either box has no area.
pub fn iou(a: &BoundingBox, b: &BoundingBox) -> f64 {
    let (aa, ba) = (a.area(), b.area());
    if aa <= 0.0 || ba <= 0.0 {
        return 0.0;
    }
    let inter = a.intersection_area(b);
    inter / (aa + ba - inter)
}

/// Distance between box centers.
pub fn center_error(a: &BoundingBox, b: &BoundingBox) -> f64 {
    a.center().distance(b.center())
}

/// Overlap threshold of success step `i`.
pub fn success_threshold(i: usize) -> f64 {
    i as f64 / (SUCCESS_STEPS - 1) as f64
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EvalCurves {
    /// `precision[t]`: fraction of frames with center error `<= t` pixels.
    pub precision: Vec<f64>,
    /// `success[i]`: fraction of frames with overlap `>= i / 20`.
    pub success: Vec<f64>,
    pub precision_at_20: f64,
    pub success_auc: f64,
}

pub fn evaluate(results: &[BoundingBox], ground_truth: &[BoundingBox]) -> Result<EvalCurves> {
    if results.len() != ground_truth.len() {
        return Err(Error::LengthMismatch {
            results: results.len(),
            ground_truth: ground_truth.len(),
        });
    }
    if results.is_empty() {
        return Err(Error::EmptySequence);
    }
    let n = results.len() as f64;
    let errors: Vec<f64> = results
        .iter()
        .zip(ground_truth)
        .map(|(r, g)| center_error(r, g))
        .collect();
    let overlaps: Vec<f64> = results.iter().zip(ground_truth).map(|(r, g)| iou(r, g)).collect();
    let precision: Vec<f64> = (0..=PRECISION_MAX_THRESHOLD)
        .map(|t| errors.iter().filter(|&&e| e <= t as f64).count() as f64 / n)
        .collect();
    let success: Vec<f64> = (0..SUCCESS_STEPS)
        .map(|i| {
            let t = success_threshold(i);
            overlaps.iter().filter(|&&o| o >= t).count() as f64 / n
        })
        .collect();
    let success_auc = success.iter().sum::<f64>() / SUCCESS_STEPS as f64;
    Ok(EvalCurves {
        precision_at_20: precision[20],
        precision,
        success,
        success_auc,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Point;
    use proptest::prelude::*;

    #[test]
    fn iou_examples() {
        let a = BoundingBox::new(0.0, 0.0, 10.0, 10.0);
        assert_eq!(iou(&a, &a), 1.0);
        assert_eq!(iou(&a, &BoundingBox::new(5.0, 0.0, 10.0, 10.0)), 50.0 / 150.0);
        assert_eq!(iou(&a, &BoundingBox::new(20.0, 20.0, 5.0, 5.0)), 0.0);
        assert_eq!(iou(&a, &BoundingBox::new(0.0, 0.0, 0.0, 10.0)), 0.0);
    }

    #[test]
    fn evaluate_examples() {
        let gt: Vec<BoundingBox> = (0..10).map(|i| BoundingBox::new(i as f64, 3.0, 20.0, 30.0)).collect();
        let c = evaluate(&gt, &gt).unwrap();
        assert_eq!(c.precision_at_20, 1.0);
        assert_eq!(c.success_auc, 1.0);
        assert_eq!(c.precision.len(), 51);
        assert_eq!(c.success.len(), 21);

        let off: Vec<BoundingBox> = gt.iter().map(|b| b.translated(Point::new(15.0, 20.0))).collect();
        let c = evaluate(&off, &gt).unwrap();
        assert_eq!(c.precision[20], 0.0);
        assert_eq!(c.precision[24], 0.0);
        assert_eq!(c.precision[25], 1.0);
        assert_eq!(c.precision[30], 1.0);

        let half: Vec<BoundingBox> = gt
            .iter()
            .enumerate()
            .map(|(i, b)| {
                if i % 2 == 0 {
                    *b
                } else {
                    b.translated(Point::new(100.0, 0.0))
                }
            })
            .collect();
        assert_eq!(evaluate(&half, &gt).unwrap().success[10], 0.5);

        assert!(matches!(evaluate(&gt[..3], &gt), Err(Error::LengthMismatch { .. })));
        assert_eq!(evaluate(&[], &[]), Err(Error::EmptySequence));
    }

    fn arb_box() -> impl Strategy<Value = BoundingBox> {
        (-50.0f64..50.0, -50.0f64..50.0, 1.0f64..60.0, 1.0f64..60.0)
            .prop_map(|(x, y, w, h)| BoundingBox::new(x, y, w, h))
    }

    proptest! {
        #[test]
        fn curves_are_monotone(pairs in prop::collection::vec((arb_box(), arb_box()), 1..30)) {
            let (r, g): (Vec<_>, Vec<_>) = pairs.into_iter().unzip();
            let c = evaluate(&r, &g).unwrap();
            prop_assert!(c.precision.windows(2).all(|w| w[0] <= w[1]));
            prop_assert!(c.success.windows(2).all(|w| w[0] >= w[1]));
            prop_assert!(c.precision.iter().chain(&c.success).all(|v| (0.0..=1.0).contains(v)));
            prop_assert_eq!(c.success[0], 1.0);
        }

        #[test]
        fn global_translation_is_ignored(
            pairs in prop::collection::vec((arb_box(), arb_box()), 1..30),
            dx in -64i32..64,
            dy in -64i32..64,
        ) {
            // integer shifts keep every coordinate exact
            let (r, g): (Vec<_>, Vec<_>) = pairs
                .into_iter()
                .map(|(a, b)| {
                    let snap = |b: BoundingBox| BoundingBox::new(b.x.round(), b.y.round(), b.width.round(), b.height.round());
                    (snap(a), snap(b))
                })
                .unzip();
            let shift = Point::new(f64::from(dx), f64::from(dy));
            let rs: Vec<_> = r.iter().map(|b| b.translated(shift)).collect();
            let gs: Vec<_> = g.iter().map(|b| b.translated(shift)).collect();
            prop_assert_eq!(evaluate(&r, &g).unwrap(), evaluate(&rs, &gs).unwrap());
        }
    }
}

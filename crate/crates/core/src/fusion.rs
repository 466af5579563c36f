//! Candidate generation, per-model similarity scores and score-level fusion.

use alloc::vec::Vec;

use crate::bdm::{binary_score, compute_lbsp, BdmGrid};
use crate::geometry::{BoundingBox, Point};
use crate::icm::{build_icm, color_score, IcmHistogram, TEMPLATE_SIZE};
use crate::imaging::{crop_resize, Image, WeightMask};
use crate::keypoints::Match;
use crate::math;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum CandidateOrigin {
    GrmGrid,
    Detector,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Candidate {
    pub bbox: BoundingBox,
    pub origin: CandidateOrigin,
}

/// Keypoint, color and binary similarity of one candidate, each in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SimilarityScores {
    pub k: f64,
    pub c: f64,
    pub b: f64,
}

impl SimilarityScores {
    pub const fn new(k: f64, c: f64, b: f64) -> Self {
        Self { k, c, b }
    }

    fn as_array(&self) -> [f64; 3] {
        [self.k, self.c, self.b]
    }
}

/// Fusion weights, largest first.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FusionWeights {
    pub p: f64,
    pub q: f64,
    pub r: f64,
}

impl Default for FusionWeights {
    fn default() -> Self {
        Self {
            p: 0.15,
            q: 0.10,
            r: 0.10,
        }
    }
}

/// The weight multiplying each score type for one frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightAssignment {
    pub k: f64,
    pub c: f64,
    pub b: f64,
}

/// Nine boxes of size `scale * base_dims` on a 3x3 grid around `center`
/// (center first), optionally followed by detector boxes.
///
/// Grid spacing is `offset_frac` of the smaller scaled side. Grid centers are
/// clamped into the frame so every candidate overlaps it. With `grid == false`
/// only the centered box is produced.
pub fn generate_candidates(
    center: Point,
    base_dims: (f64, f64),
    scale: f64,
    offset_frac: f64,
    grid: bool,
    detections: &[BoundingBox],
    frame_dims: (usize, usize),
) -> Vec<Candidate> {
    let (w, h) = (base_dims.0 * scale, base_dims.1 * scale);
    let step = offset_frac * w.min(h);
    let offsets: &[(f64, f64)] = if grid {
        &[
            (0.0, 0.0),
            (-1.0, -1.0),
            (0.0, -1.0),
            (1.0, -1.0),
            (-1.0, 0.0),
            (1.0, 0.0),
            (-1.0, 1.0),
            (0.0, 1.0),
            (1.0, 1.0),
        ]
    } else {
        &[(0.0, 0.0)]
    };
    let (fw, fh) = (frame_dims.0 as f64, frame_dims.1 as f64);
    let mut out: Vec<Candidate> = offsets
        .iter()
        .map(|&(ox, oy)| {
            let c = Point::new(
                (center.x + ox * step).clamp(0.0, fw - 1.0),
                (center.y + oy * step).clamp(0.0, fh - 1.0),
            );
            Candidate {
                bbox: BoundingBox::from_center(c, w, h),
                origin: CandidateOrigin::GrmGrid,
            }
        })
        .collect();
    out.extend(
        detections
            .iter()
            .filter(|d| d.width > 0.0 && d.height > 0.0 && d.intersects_frame(frame_dims.0, frame_dims.1))
            .map(|&bbox| Candidate {
                bbox,
                origin: CandidateOrigin::Detector,
            }),
    );
    out
}

/// `n / n_total`, where `n` counts matches inside the box; 0 when nothing matched.
pub fn keypoint_score(bbox: &BoundingBox, matches: &[Match], n_total: usize) -> f64 {
    if n_total == 0 {
        return 0.0;
    }
    let inside = matches.iter().filter(|m| bbox.contains(m.position)).count();
    inside as f64 / n_total as f64
}

/// Frame-level inputs shared by every candidate's scoring.
pub struct ScoringContext<'a> {
    pub frame: &'a Image,
    pub gray: &'a Image,
    pub matches: &'a [Match],
    pub icm_model: &'a IcmHistogram,
    pub bdm_model: &'a BdmGrid,
    pub mask: &'a WeightMask,
    pub lbsp_threshold: u8,
}

impl ScoringContext<'_> {
    /// Fresh color template for `bbox` in this frame.
    pub fn icm_for(&self, bbox: &BoundingBox) -> Result<IcmHistogram> {
        build_icm(self.frame, bbox, self.icm_model.bins(), self.mask)
    }

    /// Fresh binary template for `bbox` in this frame.
    pub fn bdm_for(&self, bbox: &BoundingBox) -> Result<BdmGrid> {
        let patch = crop_resize(self.gray, bbox, TEMPLATE_SIZE, TEMPLATE_SIZE)?;
        compute_lbsp(&patch, self.lbsp_threshold)
    }
}

pub fn score_candidate(cand: &Candidate, ctx: &ScoringContext<'_>) -> Result<SimilarityScores> {
    let bbox = &cand.bbox;
    if !(bbox.width >= 1.0 && bbox.height >= 1.0) {
        return Err(Error::DegenerateBox {
            width: bbox.width,
            height: bbox.height,
        });
    }
    let k = keypoint_score(bbox, ctx.matches, ctx.matches.len());
    let c = color_score(ctx.icm_model, &ctx.icm_for(bbox)?)?;
    let b = binary_score(ctx.bdm_model, &ctx.bdm_for(bbox)?)?;
    Ok(SimilarityScores { k, c, b })
}

/// Give the largest weight to the score that changed most since the previous
/// frame's winner, measured as the two-sample variance `((a - b) / 2)^2`.
///
/// Ties (variances within 1e-12), and the first frame, keep the fixed order
/// k, c, b.
pub fn rank_weights(
    current: &SimilarityScores,
    history: Option<&SimilarityScores>,
    weights: &FusionWeights,
) -> WeightAssignment {
    let mut order = [0usize, 1, 2];
    if let Some(prev) = history {
        let cur = current.as_array();
        let old = prev.as_array();
        // quantized so that variances equal up to rounding count as ties
        let var: [f64; 3] = core::array::from_fn(|i| {
            let half = (cur[i] - old[i]) / 2.0;
            math::round(half * half * 1e12)
        });
        // stable: equal variances keep k, c, b order
        order.sort_by(|&a, &b| var[b].total_cmp(&var[a]));
    }
    let ranked = [weights.p, weights.q, weights.r];
    let mut assigned = [0.0; 3];
    for (rank, &score) in order.iter().enumerate() {
        assigned[score] = ranked[rank];
    }
    WeightAssignment {
        k: assigned[0],
        c: assigned[1],
        b: assigned[2],
    }
}

pub fn fusion_score(scores: &SimilarityScores, assignment: &WeightAssignment) -> f64 {
    assignment.k * scores.k + assignment.c * scores.c + assignment.b * scores.b
}

/// Index and fusion score of the best candidate; the earliest wins exact ties.
pub fn select_best(scores: &[SimilarityScores], assignment: &WeightAssignment) -> Result<(usize, f64)> {
    let mut best: Option<(usize, f64)> = None;
    for (i, s) in scores.iter().enumerate() {
        let fs = fusion_score(s, assignment);
        if best.is_none_or(|(_, b)| fs > b) {
            best = Some((i, fs));
        }
    }
    best.ok_or(Error::NoCandidates)
}

//! The per-frame tracking loop.

use alloc::vec::Vec;

use crate::bdm::{compute_lbsp, update_bdm, BdmGrid};
use crate::fusion::{
    generate_candidates, rank_weights, score_candidate, select_best, Candidate, CandidateOrigin, FusionWeights,
    ScoringContext, SimilarityScores,
};
use crate::geometry::{BoundingBox, Point};
use crate::grm::{
    accumulate_responses, build_grm, localize_center, refine_peak, GraphRelationalModel, KernelConfig, WeightUpdate,
};
use crate::icm::{build_icm, update_icm, IcmHistogram, UpdateMode, TEMPLATE_SIZE};
use crate::imaging::{crop_resize, gaussian_weight_mask, to_grayscale, Image, WeightMask};
use crate::keypoints::{detect_and_describe, estimate_scale, match_descriptors, DetectorConfig, Keypoint, Match};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct TrackerConfig {
    pub eta: f64,
    pub tau: f64,
    pub gamma: f64,
    /// Keypoint-score gate for adding nodes.
    pub alpha: f64,
    /// Binary-score gate for adding nodes.
    pub beta: f64,
    pub p: f64,
    pub q: f64,
    pub r: f64,
    pub ratio: f32,
    pub sigma: f64,
    pub window: usize,
    pub theta_denom: f64,
    pub rho_icm: f64,
    pub rho_bdm: f64,
    pub bins: usize,
    pub lbsp_threshold: u8,
    pub max_nodes: usize,
    pub candidate_offset_frac: f64,
    /// Decay factor for nodes that found no match this frame.
    pub unmatched_decay: f64,
    /// Gaussian mask width for the color histogram, as a fraction of the patch side.
    pub icm_sigma_frac: f64,
    /// Template and box dims closer than this (pixels, per side) count as equal.
    pub size_tolerance: u32,
    /// Refine the response-map peak to sub-cell precision.
    pub subpixel_peak: bool,
    /// Rebuild every model from the best detection once the keypoint graph
    /// has lost all of its nodes.
    pub reinit_on_detection: bool,
    /// Use every detection as a candidate instead of only the first.
    pub use_all_detections: bool,
    pub disable_detector: bool,
    pub disable_candidates: bool,
    pub disable_template_updates: bool,
    pub disable_grm_add_delete: bool,
    pub detector: DetectorConfig,
}

impl Default for TrackerConfig {
    fn default() -> Self {
        Self {
            eta: 0.005,
            tau: 0.9,
            gamma: 0.1,
            alpha: 0.23,
            beta: 0.1,
            p: 0.15,
            q: 0.10,
            r: 0.10,
            ratio: 0.75,
            sigma: 6.0,
            window: 5,
            theta_denom: 8000.0,
            rho_icm: 0.125,
            rho_bdm: 0.10,
            bins: 16,
            lbsp_threshold: 30,
            max_nodes: 400,
            candidate_offset_frac: 0.15,
            unmatched_decay: 0.9,
            icm_sigma_frac: 0.5,
            size_tolerance: 2,
            subpixel_peak: true,
            reinit_on_detection: true,
            use_all_detections: false,
            disable_detector: false,
            disable_candidates: false,
            disable_template_updates: false,
            disable_grm_add_delete: false,
            detector: DetectorConfig::default(),
        }
    }
}

fn open_unit(v: f64) -> bool {
    v > 0.0 && v < 1.0
}

impl TrackerConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            self.eta,
            self.p,
            self.q,
            self.r,
            self.sigma,
            self.theta_denom,
            self.rho_icm,
            self.rho_bdm,
            self.candidate_offset_frac,
            self.icm_sigma_frac,
        ];
        if !positive.iter().all(|v| *v > 0.0 && v.is_finite()) {
            return Err(Error::InvalidConfig("rates, weights and kernel sizes must be positive"));
        }
        if ![self.tau, self.gamma, self.alpha, self.beta, f64::from(self.ratio)]
            .into_iter()
            .all(open_unit)
        {
            return Err(Error::InvalidConfig(
                "tau, gamma, alpha, beta and ratio must lie in (0, 1)",
            ));
        }
        if !(0.0..=1.0).contains(&self.unmatched_decay) {
            return Err(Error::InvalidConfig("unmatched_decay must lie in [0, 1]"));
        }
        if !(self.p >= self.q && self.q >= self.r) {
            return Err(Error::InvalidConfig("fusion weights must satisfy p >= q >= r"));
        }
        if self.rho_icm > 1.0 || self.rho_bdm > 1.0 {
            return Err(Error::InvalidConfig("update rates must not exceed 1"));
        }
        if self.window == 0 || self.window.is_multiple_of(2) {
            return Err(Error::InvalidConfig("window must be odd"));
        }
        if self.bins == 0 || self.bins > 256 {
            return Err(Error::InvalidConfig("bins must be in 1..=256"));
        }
        if self.max_nodes == 0 || self.lbsp_threshold == 0 {
            return Err(Error::InvalidConfig("max_nodes and lbsp_threshold must be positive"));
        }
        Ok(())
    }

    pub fn kernel(&self) -> KernelConfig {
        KernelConfig {
            sigma: self.sigma,
            window: self.window,
            theta: self.theta_denom,
        }
    }

    pub fn fusion_weights(&self) -> FusionWeights {
        FusionWeights {
            p: self.p,
            q: self.q,
            r: self.r,
        }
    }

    fn weight_update(&self) -> WeightUpdate {
        WeightUpdate {
            tau: self.tau,
            eta: self.eta,
            gamma: self.gamma,
            unmatched_decay: self.unmatched_decay,
            prune: !self.disable_grm_add_delete,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrackerState {
    pub bbox: BoundingBox,
    pub prev_center: Point,
    /// Cumulative scale relative to the initial box.
    pub scale: f64,
    pub occluded: bool,
    pub grm: GraphRelationalModel,
    pub icm: IcmHistogram,
    pub bdm: BdmGrid,
    /// Scores of the previous frame's winner.
    pub score_history: Option<SimilarityScores>,
    /// Frames processed, counting the initialization frame.
    pub frame_index: usize,
    /// Box dimensions at initialization.
    pub base_dims: (f64, f64),
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TrackResult {
    /// 0-based index of the frame this result belongs to.
    pub frame_index: usize,
    pub bbox: BoundingBox,
    pub fusion_score: f64,
    pub occluded: bool,
    pub n_matches: usize,
    pub scores: SimilarityScores,
    pub origin: CandidateOrigin,
}

pub struct Tracker {
    config: TrackerConfig,
    mask: WeightMask,
    state: TrackerState,
}

fn rgb_check(frame: &Image) -> Result<()> {
    if frame.channels() != 3 {
        return Err(Error::ChannelMismatch {
            expected: 3,
            actual: frame.channels(),
        });
    }
    Ok(())
}

fn keypoints_in<'a>(kps: &'a [Keypoint], bbox: &'a BoundingBox) -> impl Iterator<Item = &'a Keypoint> + 'a {
    kps.iter().filter(move |k| bbox.contains(k.position()))
}

impl Tracker {
    /// Initialize on `frame` (RGB) with the target in `init_box`.
    pub fn init(frame: &Image, init_box: BoundingBox, config: TrackerConfig) -> Result<Self> {
        rgb_check(frame)?;
        let gray = to_grayscale(frame);
        let kps = detect_and_describe(&gray, &config.detector)?;
        Self::init_inner(frame, &gray, &kps, init_box, config)
    }

    /// Like [`Tracker::init`], with keypoints supplied by the caller.
    pub fn init_with_keypoints(
        frame: &Image,
        keypoints: &[Keypoint],
        init_box: BoundingBox,
        config: TrackerConfig,
    ) -> Result<Self> {
        rgb_check(frame)?;
        let gray = to_grayscale(frame);
        Self::init_inner(frame, &gray, keypoints, init_box, config)
    }

    fn init_inner(
        frame: &Image,
        gray: &Image,
        kps: &[Keypoint],
        init_box: BoundingBox,
        config: TrackerConfig,
    ) -> Result<Self> {
        config.validate()?;
        if !(init_box.is_finite() && init_box.width >= 1.0 && init_box.height >= 1.0) {
            return Err(Error::DegenerateBox {
                width: init_box.width,
                height: init_box.height,
            });
        }
        if !init_box.intersects_frame(frame.width(), frame.height()) {
            return Err(Error::BoxOutsideFrame {
                width: frame.width(),
                height: frame.height(),
            });
        }
        let inside: Vec<Keypoint> = keypoints_in(kps, &init_box).cloned().collect();
        let grm = build_grm(&inside, &init_box, config.eta, config.max_nodes)?;
        let mask = gaussian_weight_mask(TEMPLATE_SIZE, TEMPLATE_SIZE, config.icm_sigma_frac);
        let icm = build_icm(frame, &init_box, config.bins, &mask)?;
        let bdm = lbsp_for(gray, &init_box, config.lbsp_threshold)?;
        let state = TrackerState {
            bbox: init_box,
            prev_center: init_box.center(),
            scale: 1.0,
            occluded: false,
            grm,
            icm,
            bdm,
            score_history: None,
            frame_index: 1,
            base_dims: (init_box.width, init_box.height),
        };
        Ok(Self { config, mask, state })
    }

    pub fn config(&self) -> &TrackerConfig {
        &self.config
    }

    pub fn state(&self) -> &TrackerState {
        &self.state
    }

    /// Track into the next RGB frame. `detections` are external face boxes,
    /// best first.
    pub fn step(&mut self, frame: &Image, detections: &[BoundingBox]) -> Result<TrackResult> {
        rgb_check(frame)?;
        let gray = to_grayscale(frame);
        let kps = detect_and_describe(&gray, &self.config.detector)?;
        self.step_inner(frame, &gray, &kps, detections)
    }

    /// Like [`Tracker::step`], with keypoints supplied by the caller.
    pub fn step_with_keypoints(
        &mut self,
        frame: &Image,
        keypoints: &[Keypoint],
        detections: &[BoundingBox],
    ) -> Result<TrackResult> {
        rgb_check(frame)?;
        let gray = to_grayscale(frame);
        self.step_inner(frame, &gray, keypoints, detections)
    }

    fn step_inner(
        &mut self,
        frame: &Image,
        gray: &Image,
        kps: &[Keypoint],
        detections: &[BoundingBox],
    ) -> Result<TrackResult> {
        let cfg = &self.config;
        let (fw, fh) = (frame.width(), frame.height());
        let matches = if self.state.grm.is_empty() {
            Vec::new()
        } else {
            match_descriptors(kps, &self.state.grm.descriptors(), cfg.ratio)
        };
        let n = matches.len();

        if n >= 2 {
            let factor = estimate_scale(&matches, &self.state.grm.ref_positions());
            if factor.is_finite() && factor > 0.0 {
                self.state.scale *= factor;
            }
        }

        let (center, occluded) = if n >= 1 {
            let map = accumulate_responses(
                &matches,
                &self.state.grm,
                self.state.prev_center,
                self.state.scale,
                &cfg.kernel(),
                fw,
                fh,
            );
            match localize_center(&map, self.state.prev_center) {
                Ok(c) if cfg.subpixel_peak => (refine_peak(&map, c, cfg.window), false),
                Ok(c) => (c, false),
                // every vote fell outside the frame
                Err(_) => (self.state.prev_center, false),
            }
        } else {
            (self.state.prev_center, true)
        };

        let dets: &[BoundingBox] = if cfg.disable_detector {
            &[]
        } else if cfg.use_all_detections {
            detections
        } else {
            &detections[..detections.len().min(1)]
        };
        let candidates = generate_candidates(
            center,
            self.state.base_dims,
            self.state.scale,
            cfg.candidate_offset_frac,
            !cfg.disable_candidates,
            dets,
            (fw, fh),
        );
        let has_detection = candidates.iter().any(|c| c.origin == CandidateOrigin::Detector);

        let ctx = ScoringContext {
            frame,
            gray,
            matches: &matches,
            icm_model: &self.state.icm,
            bdm_model: &self.state.bdm,
            mask: &self.mask,
            lbsp_threshold: cfg.lbsp_threshold,
        };
        let scores = candidates
            .iter()
            .map(|c| score_candidate(c, &ctx))
            .collect::<Result<Vec<_>>>()?;
        let assignment = rank_weights(&scores[0], self.state.score_history.as_ref(), &cfg.fusion_weights());
        let (best_index, fusion_score) = select_best(&scores, &assignment)?;
        let best = candidates[best_index];
        let best_scores = scores[best_index];

        self.control_and_update(&best, &best_scores, &matches, center, frame, gray, kps)?;

        let mut chosen = best;
        let mut chosen_scores = best_scores;
        let mut chosen_fusion = fusion_score;
        if let Some(i) = self.reinit_index(&candidates) {
            if self.reinit(frame, gray, kps, &candidates[i].bbox)? {
                chosen = candidates[i];
                chosen_scores = scores[i];
                chosen_fusion = crate::fusion::fusion_score(&chosen_scores, &assignment);
            }
        }
        let (best, best_scores, fusion_score) = (chosen, chosen_scores, chosen_fusion);

        if n > 0 || has_detection {
            self.state.bbox = best.bbox;
        }
        self.state.prev_center = self.state.bbox.center();
        self.state.occluded = occluded;
        self.state.score_history = Some(best_scores);
        let result = TrackResult {
            frame_index: self.state.frame_index,
            bbox: self.state.bbox,
            fusion_score,
            occluded,
            n_matches: n,
            scores: best_scores,
            origin: best.origin,
        };
        self.state.frame_index += 1;
        Ok(result)
    }

    /// The detector candidate to restart from, if the graph is empty.
    fn reinit_index(&self, candidates: &[Candidate]) -> Option<usize> {
        let cfg = &self.config;
        if !cfg.reinit_on_detection || cfg.disable_template_updates || !self.state.grm.is_empty() {
            return None;
        }
        candidates.iter().position(|c| c.origin == CandidateOrigin::Detector)
    }

    /// Rebuild graph and templates from `bbox`. Returns false, leaving the
    /// state untouched, when the box holds no keypoints.
    fn reinit(&mut self, frame: &Image, gray: &Image, kps: &[Keypoint], bbox: &BoundingBox) -> Result<bool> {
        let cfg = &self.config;
        let inside: Vec<Keypoint> = keypoints_in(kps, bbox).cloned().collect();
        let grm = match build_grm(&inside, bbox, cfg.eta, cfg.max_nodes) {
            Ok(g) => g,
            Err(Error::NoKeypoints) => return Ok(false),
            Err(e) => return Err(e),
        };
        let state = &mut self.state;
        state.grm = grm;
        state.icm = build_icm(frame, bbox, cfg.bins, &self.mask)?;
        state.bdm = lbsp_for(gray, bbox, cfg.lbsp_threshold)?;
        state.scale = 1.0;
        state.base_dims = (bbox.width, bbox.height);
        Ok(true)
    }

    /// Long-term weight adaptation, occlusion-time template maintenance and
    /// gated model growth.
    #[allow(clippy::too_many_arguments)]
    fn control_and_update(
        &mut self,
        best: &Candidate,
        best_scores: &SimilarityScores,
        matches: &[Match],
        center: Point,
        frame: &Image,
        gray: &Image,
        kps: &[Keypoint],
    ) -> Result<()> {
        let cfg = &self.config;
        let state = &mut self.state;
        // refresh before pruning, which shifts node indices
        state.grm.refresh_positions(matches);
        state
            .grm
            .update_weights(matches, center, state.scale, &cfg.weight_update());

        if matches.is_empty() && !cfg.disable_template_updates {
            let (tw, th) = state.icm.template_dims();
            let (bw, bh) = best.bbox.rounded_dims();
            let same = tw.abs_diff(bw) <= cfg.size_tolerance && th.abs_diff(bh) <= cfg.size_tolerance;
            let mode = if same { UpdateMode::Full } else { UpdateMode::Partial };
            refresh_templates(state, cfg, &self.mask, frame, gray, &best.bbox, mode)?;
        }

        let gate = best_scores.k > cfg.alpha && best_scores.b > cfg.beta;
        if gate && !cfg.disable_grm_add_delete {
            let inside: Vec<Keypoint> = keypoints_in(kps, &best.bbox).cloned().collect();
            state.grm.add_keypoints(&inside, &best.bbox, state.scale, cfg.eta);
        }
        if gate && !cfg.disable_template_updates {
            refresh_templates(state, cfg, &self.mask, frame, gray, &best.bbox, UpdateMode::Full)?;
        }
        Ok(())
    }
}

fn lbsp_for(gray: &Image, bbox: &BoundingBox, threshold: u8) -> Result<BdmGrid> {
    let patch = crop_resize(gray, bbox, TEMPLATE_SIZE, TEMPLATE_SIZE)?;
    compute_lbsp(&patch, threshold)
}

fn refresh_templates(
    state: &mut TrackerState,
    cfg: &TrackerConfig,
    mask: &WeightMask,
    frame: &Image,
    gray: &Image,
    bbox: &BoundingBox,
    mode: UpdateMode,
) -> Result<()> {
    let icm = build_icm(frame, bbox, cfg.bins, mask)?;
    let bdm = lbsp_for(gray, bbox, cfg.lbsp_threshold)?;
    state.icm = update_icm(&state.icm, &icm, mode, cfg.rho_icm)?;
    state.bdm = update_bdm(&state.bdm, &bdm, mode, cfg.rho_bdm)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Smooth background with a high-contrast blob texture pasted at `(ox, oy)`.
    fn scene(ox: usize, oy: usize) -> Image {
        Image::from_rgb_fn(160, 120, |x, y| {
            let (tx, ty) = (x as i64 - ox as i64, y as i64 - oy as i64);
            if (0..40).contains(&tx) && (0..40).contains(&ty) {
                let blobs = [
                    (8, 9, 40u8),
                    (27, 6, 230),
                    (16, 22, 20),
                    (31, 28, 250),
                    (7, 32, 200),
                    (22, 35, 60),
                ];
                let mut v = 128i32;
                for &(bx, by, level) in &blobs {
                    let d2 = (tx - bx) * (tx - bx) + (ty - by) * (ty - by);
                    if d2 < 16 {
                        v = i32::from(level);
                    }
                }
                let v = v as u8;
                [v, v / 2 + 60, 255 - v]
            } else {
                let g = (90 + x / 8 + y / 10) as u8;
                [g, g, g]
            }
        })
        .unwrap()
    }

    #[test]
    fn default_config_is_valid() {
        assert!(TrackerConfig::default().validate().is_ok());
        let bad = TrackerConfig {
            tau: 1.5,
            ..TrackerConfig::default()
        };
        assert!(bad.validate().is_err());
        let bad = TrackerConfig {
            window: 4,
            ..TrackerConfig::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn init_builds_models() {
        let frame = scene(60, 40);
        let t = Tracker::init(
            &frame,
            BoundingBox::new(60.0, 40.0, 40.0, 40.0),
            TrackerConfig::default(),
        )
        .unwrap();
        assert!(!t.state().grm.is_empty());
        assert!(!t.state().occluded);
        assert_eq!(t.state().prev_center, Point::new(80.0, 60.0));
        assert_eq!(t.state().scale, 1.0);
    }

    #[test]
    fn init_rejects_flat_region_and_gray_frames() {
        let frame = scene(60, 40);
        let flat = BoundingBox::new(2.0, 2.0, 20.0, 20.0);
        assert_eq!(
            Tracker::init(&frame, flat, TrackerConfig::default()).err(),
            Some(Error::NoKeypoints)
        );
        let gray = to_grayscale(&frame);
        assert!(Tracker::init(&gray, flat, TrackerConfig::default()).is_err());
        let outside = BoundingBox::new(500.0, 2.0, 20.0, 20.0);
        assert!(Tracker::init(&frame, outside, TrackerConfig::default()).is_err());
    }

    #[test]
    fn whole_frame_init_is_centered() {
        let frame = scene(60, 40);
        let t = Tracker::init(
            &frame,
            BoundingBox::new(0.0, 0.0, 160.0, 120.0),
            TrackerConfig::default(),
        )
        .unwrap();
        assert_eq!(t.state().prev_center, Point::new(80.0, 60.0));
    }

    #[test]
    fn static_scene_stays_put() {
        let frame = scene(60, 40);
        let init = BoundingBox::new(60.0, 40.0, 40.0, 40.0);
        let mut t = Tracker::init(&frame, init, TrackerConfig::default()).unwrap();
        for _ in 0..3 {
            let r = t.step(&frame, &[]).unwrap();
            assert!(!r.occluded);
            assert!(r.bbox.center().distance(init.center()) <= 1.5, "{:?}", r.bbox);
        }
    }

    #[test]
    fn follows_translation() {
        let init = BoundingBox::new(40.0, 40.0, 40.0, 40.0);
        let mut t = Tracker::init(&scene(40, 40), init, TrackerConfig::default()).unwrap();
        for i in 1..=10 {
            let r = t.step(&scene(40 + 2 * i, 40), &[]).unwrap();
            let truth = init.translated(Point::new(2.0 * i as f64, 0.0)).center();
            assert!(r.bbox.center().distance(truth) <= 3.0, "frame {i}: {:?}", r.bbox);
        }
    }

    #[test]
    fn covered_target_is_occluded_and_box_frozen() {
        let init = BoundingBox::new(60.0, 40.0, 40.0, 40.0);
        let mut t = Tracker::init(&scene(60, 40), init, TrackerConfig::default()).unwrap();
        let covered = Image::filled(160, 120, &[100, 100, 100]).unwrap();
        let r = t.step(&covered, &[]).unwrap();
        assert!(r.occluded);
        assert_eq!(r.n_matches, 0);
        assert_eq!(r.bbox, init);
    }

    #[test]
    fn disabled_updates_freeze_templates() {
        let cfg = TrackerConfig {
            disable_template_updates: true,
            ..TrackerConfig::default()
        };
        let init = BoundingBox::new(40.0, 40.0, 40.0, 40.0);
        let mut t = Tracker::init(&scene(40, 40), init, cfg).unwrap();
        let (icm, bdm) = (t.state().icm.clone(), t.state().bdm.clone());
        for i in 1..=4 {
            t.step(&scene(40 + 3 * i, 40), &[]).unwrap();
            t.step(&Image::filled(160, 120, &[10, 200, 10]).unwrap(), &[]).unwrap();
            assert_eq!(t.state().icm, icm);
            assert_eq!(t.state().bdm, bdm);
        }
    }

    #[test]
    fn uniform_frame_keeps_grid_winner() {
        let init = BoundingBox::new(60.0, 40.0, 40.0, 40.0);
        let mut t = Tracker::init(&scene(60, 40), init, TrackerConfig::default()).unwrap();
        let covered = Image::filled(160, 120, &[100, 100, 100]).unwrap();
        let det = BoundingBox::new(10.0, 10.0, 40.0, 40.0);
        let r = t.step(&covered, &[det]).unwrap();
        assert!(r.occluded);
        // uniform frame: every candidate scores the same, the earliest wins
        assert_eq!(r.origin, CandidateOrigin::GrmGrid);
        assert_eq!(r.bbox, init);
    }

    #[test]
    fn detection_restarts_an_emptied_graph() {
        let init = BoundingBox::new(60.0, 40.0, 40.0, 40.0);
        let mut t = Tracker::init(&scene(60, 40), init, TrackerConfig::default()).unwrap();
        let covered = Image::filled(160, 120, &[100, 100, 100]).unwrap();
        t.step(&covered, &[]).unwrap();
        assert!(t.state().grm.is_empty());

        let det = BoundingBox::new(90.0, 50.0, 40.0, 40.0);
        let r = t.step(&scene(90, 50), &[det]).unwrap();
        assert_eq!(r.origin, CandidateOrigin::Detector);
        assert_eq!(r.bbox, det);
        assert!(!t.state().grm.is_empty());

        let r = t.step(&scene(92, 50), &[]).unwrap();
        assert!(!r.occluded);
        assert!(r.bbox.center().distance(Point::new(112.0, 70.0)) <= 1.5);

        let cfg = TrackerConfig {
            reinit_on_detection: false,
            ..TrackerConfig::default()
        };
        let mut t = Tracker::init(&scene(60, 40), init, cfg).unwrap();
        t.step(&covered, &[]).unwrap();
        t.step(&scene(90, 50), &[det]).unwrap();
        assert!(t.state().grm.is_empty());
    }
}

//! One-pass runs: initialize on the first frame, track every later frame.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use facetrack_core::fusion::{CandidateOrigin, SimilarityScores};
use facetrack_core::metrics::{evaluate, EvalCurves};
use facetrack_core::{BoundingBox, Image, Keypoint, TrackResult, Tracker, TrackerConfig};

use crate::image_io::load_image;
use crate::keypoint_csv::load_keypoints;
use crate::results::{write_curves, write_overlays, write_results, write_summary, ResultRow, Summary};
use crate::sequence::{load_detections, load_sequence, Detection, SequenceSpec, DETECTIONS_FILE};
use crate::{BenchError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitMode {
    GroundTruth,
    Detections,
}

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub config: TrackerConfig,
    pub init: InitMode,
    /// Detections file; defaults to `detections.csv` inside the sequence.
    pub detections: Option<PathBuf>,
    pub keypoints: Option<PathBuf>,
    pub overlays: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            config: TrackerConfig::default(),
            init: InitMode::GroundTruth,
            detections: None,
            keypoints: None,
            overlays: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub results: Vec<TrackResult>,
    pub curves: EvalCurves,
    pub fps: f64,
}

/// Track `n_frames` frames produced by `frame_at`, starting from `init_box`
/// on frame 0. The first result is the initialization box itself.
///
/// Returns the results and the tracking time in seconds.
pub fn track(
    n_frames: usize,
    mut frame_at: impl FnMut(usize) -> Result<Image>,
    init_box: BoundingBox,
    detections: &[Vec<Detection>],
    keypoints: Option<&[Vec<Keypoint>]>,
    config: TrackerConfig,
) -> Result<(Vec<TrackResult>, f64)> {
    if n_frames == 0 {
        return Ok((Vec::new(), 0.0));
    }
    let dets_for = |i: usize| -> Vec<BoundingBox> {
        detections
            .get(i)
            .map(|d| d.iter().map(|d| d.bbox).collect())
            .unwrap_or_default()
    };
    let first = frame_at(0)?;
    let start = Instant::now();
    let mut tracker = match keypoints {
        Some(kps) => Tracker::init_with_keypoints(&first, &kps[0], init_box, config),
        None => Tracker::init(&first, init_box, config),
    }
    .map_err(|e| BenchError::Init(e.to_string()))?;
    let mut elapsed = start.elapsed().as_secs_f64();
    let mut results = Vec::with_capacity(n_frames);
    results.push(TrackResult {
        frame_index: 0,
        bbox: init_box,
        fusion_score: 0.0,
        occluded: false,
        n_matches: tracker.state().grm.len(),
        scores: SimilarityScores::new(1.0, 1.0, 1.0),
        origin: CandidateOrigin::GrmGrid,
    });
    for i in 1..n_frames {
        let frame = frame_at(i)?;
        let dets = dets_for(i);
        let start = Instant::now();
        let r = match keypoints {
            Some(kps) => tracker.step_with_keypoints(&frame, &kps[i], &dets)?,
            None => tracker.step(&frame, &dets)?,
        };
        elapsed += start.elapsed().as_secs_f64();
        results.push(r);
    }
    Ok((results, elapsed))
}

pub fn result_rows(results: &[TrackResult]) -> Vec<ResultRow> {
    results
        .iter()
        .map(|r| ResultRow {
            frame: r.frame_index,
            bbox: r.bbox,
            score: r.fusion_score,
            occluded: r.occluded,
        })
        .collect()
}

fn init_box(seq: &SequenceSpec, detections: &[Vec<Detection>], mode: InitMode) -> Result<BoundingBox> {
    match mode {
        InitMode::GroundTruth => Ok(seq.ground_truth[0]),
        InitMode::Detections => detections
            .first()
            .and_then(|d| d.first())
            .map(|d| d.bbox)
            .ok_or_else(|| BenchError::Init("no detection on the first frame".into())),
    }
}

pub fn run_sequence(seq: &SequenceSpec, dir: &Path, opts: &RunOptions) -> Result<RunOutput> {
    let det_path = opts.detections.clone().or_else(|| {
        let p = dir.join(DETECTIONS_FILE);
        p.exists().then_some(p)
    });
    let detections = match &det_path {
        Some(p) => load_detections(p, seq.len())?,
        None if opts.init == InitMode::Detections => {
            return Err(BenchError::Init(
                "detection initialization needs a detections file".into(),
            ))
        }
        None => vec![Vec::new(); seq.len()],
    };
    let keypoints = opts
        .keypoints
        .as_deref()
        .map(|p| load_keypoints(p, seq.len()))
        .transpose()?;
    let init = init_box(seq, &detections, opts.init)?;
    let (results, secs) = track(
        seq.len(),
        |i| load_image(&seq.frames[i]),
        init,
        &detections,
        keypoints.as_deref(),
        opts.config.clone(),
    )?;
    let boxes: Vec<BoundingBox> = results.iter().map(|r| r.bbox).collect();
    let curves = evaluate(&boxes, &seq.ground_truth)?;
    let fps = if secs > 0.0 { results.len() as f64 / secs } else { 0.0 };
    Ok(RunOutput { results, curves, fps })
}

/// Run one sequence directory and write `results.csv`, `curves.csv`,
/// `summary.json` (and `overlays/` when asked) into `out`.
pub fn run_to_dir(dir: &Path, opts: &RunOptions, out: &Path) -> Result<Summary> {
    let seq = load_sequence(dir)?;
    let output = run_sequence(&seq, dir, opts)?;
    fs::create_dir_all(out).map_err(|e| BenchError::io(out, e))?;
    write_results(&out.join("results.csv"), &result_rows(&output.results))?;
    write_curves(&out.join("curves.csv"), &output.curves)?;
    let summary = Summary {
        sequence: seq.name.clone(),
        frames: seq.len(),
        precision_at_20: output.curves.precision_at_20,
        success_auc: output.curves.success_auc,
        fps: output.fps,
    };
    write_summary(&out.join("summary.json"), &summary)?;
    if opts.overlays {
        let boxes: Vec<BoundingBox> = output.results.iter().map(|r| r.bbox).collect();
        write_overlays(&seq.frames, &boxes, &seq.ground_truth, &out.join("overlays"))?;
    }
    Ok(summary)
}

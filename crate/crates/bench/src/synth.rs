//! Synthetic tracking sequences with exact ground truth.
//!
//! The target is a soft-edged ellipse of colored blobs filling its ground
//! truth box. The background is a low-contrast wave pattern with pixel grain,
//! too faint to produce keypoints of its own. Everything is generated from a
//! seed, so the same configuration always produces the same bytes.

use std::f64::consts::TAU;
use std::fs;
use std::path::Path;

use facetrack_core::{BoundingBox, Image};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::image_io::save_png;
use crate::sequence::{format_boxes, format_detections, Detection, DETECTIONS_FILE, FRAME_DIR, GROUND_TRUTH_FILE};
use crate::{BenchError, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Scenario {
    /// Constant velocity in pixels per frame.
    Translation { vx: f64, vy: f64 },
    /// Target size grows linearly from `start` to `end` times the base size.
    ScaleRamp { start: f64, end: f64 },
    /// An opaque block covers `coverage` of the target on frames
    /// `start..=end` (1-based).
    Occlusion { start: usize, end: usize, coverage: f64 },
    /// Static look-alike patches; a false detection sits on the first one.
    Clutter { distractors: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub scenario: Scenario,
    pub frames: usize,
    pub width: usize,
    pub height: usize,
    /// Side of the square target at scale 1.
    pub target_size: f64,
    pub seed: u64,
    /// Standard deviation of detection position and size noise, in pixels.
    pub detection_jitter: f64,
    /// Probability that the detector misses the target on a frame.
    pub detection_dropout: f64,
}

impl SynthConfig {
    pub fn new(scenario: Scenario) -> Self {
        Self {
            scenario,
            frames: 100,
            width: 320,
            height: 240,
            target_size: 60.0,
            seed: 7,
            detection_jitter: 1.5,
            detection_dropout: 0.0,
        }
    }

    fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(BenchError::Scenario(m.to_string()));
        if self.frames < 2 {
            return bad("need at least 2 frames");
        }
        if self.width < 64 || self.height < 64 {
            return bad("frame must be at least 64x64");
        }
        if !(self.target_size >= 16.0 && self.target_size.is_finite()) {
            return bad("target size must be at least 16");
        }
        if !(self.detection_jitter >= 0.0 && self.detection_jitter.is_finite()) {
            return bad("detection jitter must be non-negative");
        }
        if !(0.0..1.0).contains(&self.detection_dropout) {
            return bad("detection dropout must be in [0, 1)");
        }
        match self.scenario {
            Scenario::Translation { vx, vy } if !(vx.is_finite() && vy.is_finite()) => bad("velocity must be finite"),
            Scenario::ScaleRamp { start, end }
                if !(start > 0.0 && end > 0.0 && start.is_finite() && end.is_finite()) =>
            {
                bad("scale factors must be positive")
            }
            Scenario::Occlusion { start, end, coverage } => {
                if start == 0 || start > end || end > self.frames {
                    bad("occlusion frames must satisfy 1 <= start <= end <= frames")
                } else if !(coverage > 0.0 && coverage <= 1.0) {
                    bad("coverage must be in (0, 1]")
                } else {
                    Ok(())
                }
            }
            Scenario::Clutter { distractors } if distractors == 0 || distractors > 8 => {
                bad("distractor count must be in 1..=8")
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthSequence {
    pub frames: Vec<Image>,
    pub ground_truth: Vec<BoundingBox>,
    pub detections: Vec<Vec<Detection>>,
    /// Occluder box per frame, if any.
    pub occluders: Vec<Option<BoundingBox>>,
    /// Static distractor boxes.
    pub distractors: Vec<BoundingBox>,
}

#[derive(Debug, Clone)]
struct Blob {
    u: f64,
    v: f64,
    radius: f64,
    color: [f64; 3],
}

/// Blob pattern in unit coordinates, rendered into any box.
#[derive(Debug, Clone)]
struct Texture {
    base: [f64; 3],
    blobs: Vec<Blob>,
}

impl Texture {
    fn random(rng: &mut ChaCha8Rng) -> Self {
        let base = [
            rng.random_range(170.0..210.0),
            rng.random_range(130.0..170.0),
            rng.random_range(100.0..140.0),
        ];
        let blobs = (0..22)
            .map(|_| {
                let dark = rng.random_bool(0.5);
                let color = core::array::from_fn(|_| {
                    if dark {
                        rng.random_range(0.0..70.0)
                    } else {
                        rng.random_range(200.0..255.0)
                    }
                });
                Blob {
                    u: rng.random_range(0.2..0.8),
                    v: rng.random_range(0.2..0.8),
                    radius: rng.random_range(0.035..0.08),
                    color,
                }
            })
            .collect();
        Self { base, blobs }
    }

    /// Opacity of the elliptical outline, fading out over the outer rim.
    fn coverage(&self, u: f64, v: f64) -> f64 {
        let r = ((2.0 * u - 1.0).powi(2) + (2.0 * v - 1.0).powi(2)).sqrt();
        let t = ((1.0 - r) / 0.15).clamp(0.0, 1.0);
        t * t * (3.0 - 2.0 * t)
    }

    fn sample(&self, u: f64, v: f64) -> [f64; 3] {
        let mut c = self.base;
        for b in &self.blobs {
            let d2 = (u - b.u).powi(2) + (v - b.v).powi(2);
            let a = (-d2 / (2.0 * b.radius * b.radius)).exp();
            if a < 1e-3 {
                continue;
            }
            for (ch, bc) in c.iter_mut().zip(b.color) {
                *ch += a * (bc - *ch);
            }
        }
        c
    }
}

#[derive(Debug, Clone, Copy)]
struct Background {
    phase: [f64; 4],
}

impl Background {
    fn sample(&self, x: usize, y: usize, seed: u64) -> [f64; 3] {
        let (fx, fy) = (x as f64, y as f64);
        let wave = 7.0 * (TAU * fx / 150.0 + self.phase[0]).sin() * (TAU * fy / 120.0 + self.phase[1]).cos()
            + 4.0 * (TAU * (fx + fy) / 210.0 + self.phase[2]).sin();
        let grain = (hash(x as u64, y as u64, seed) % 5) as f64 - 2.0;
        let tint = 3.0 * (TAU * fy / 300.0 + self.phase[3]).sin();
        [
            95.0 + wave + grain + tint,
            105.0 + wave + grain,
            115.0 + wave + grain - tint,
        ]
    }
}

fn hash(x: u64, y: u64, seed: u64) -> u64 {
    let mut h = x.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ y.wrapping_mul(0xC2B2_AE3D_27D4_EB4F) ^ seed;
    h ^= h >> 31;
    h = h.wrapping_mul(0xBF58_476D_1CE4_E5B9);
    h ^ (h >> 29)
}

fn to_u8(v: f64) -> u8 {
    v.round().clamp(0.0, 255.0) as u8
}

fn paint(canvas: &mut [[f64; 3]], width: usize, height: usize, bbox: &BoundingBox, texture: &Texture) {
    let x0 = bbox.x.floor().max(0.0) as usize;
    let y0 = bbox.y.floor().max(0.0) as usize;
    let x1 = (bbox.right().ceil().max(0.0) as usize).min(width);
    let y1 = (bbox.bottom().ceil().max(0.0) as usize).min(height);
    for y in y0..y1 {
        for x in x0..x1 {
            let (px, py) = (x as f64 + 0.5, y as f64 + 0.5);
            if px < bbox.x || px >= bbox.right() || py < bbox.y || py >= bbox.bottom() {
                continue;
            }
            let (u, v) = ((px - bbox.x) / bbox.width, (py - bbox.y) / bbox.height);
            let a = texture.coverage(u, v);
            if a <= 0.0 {
                continue;
            }
            let fg = texture.sample(u, v);
            let bg = &mut canvas[y * width + x];
            for (b, f) in bg.iter_mut().zip(fg) {
                *b += a * (f - *b);
            }
        }
    }
}

fn fill(canvas: &mut [[f64; 3]], width: usize, height: usize, bbox: &BoundingBox, color: [f64; 3]) {
    let x0 = bbox.x.round().max(0.0) as usize;
    let y0 = bbox.y.round().max(0.0) as usize;
    let x1 = (bbox.right().round().max(0.0) as usize).min(width);
    let y1 = (bbox.bottom().round().max(0.0) as usize).min(height);
    for y in y0..y1 {
        for px in &mut canvas[y * width + x0..y * width + x1] {
            *px = color;
        }
    }
}

fn inside(b: &BoundingBox, width: usize, height: usize) -> bool {
    b.x >= 0.0 && b.y >= 0.0 && b.right() <= width as f64 && b.bottom() <= height as f64
}

/// Ground-truth boxes for every frame.
fn trajectory(cfg: &SynthConfig) -> Vec<BoundingBox> {
    let n = cfg.frames;
    let last = (n - 1) as f64;
    let mid = (cfg.width as f64 / 2.0, cfg.height as f64 / 2.0);
    let s = cfg.target_size;
    let moving = |vx: f64, vy: f64, k: usize, size: f64| {
        let t = k as f64 - last / 2.0;
        BoundingBox::new(mid.0 + vx * t - size / 2.0, mid.1 + vy * t - size / 2.0, size, size)
    };
    (0..n)
        .map(|k| match cfg.scenario {
            Scenario::Translation { vx, vy } => moving(vx, vy, k, s),
            Scenario::ScaleRamp { start, end } => {
                let size = s * (start + (end - start) * k as f64 / last);
                moving(0.4, 0.0, k, size)
            }
            Scenario::Occlusion { .. } => moving(0.5, 0.0, k, s),
            Scenario::Clutter { .. } => {
                let b = moving(1.0, 0.0, k, s);
                BoundingBox::new(b.x, cfg.height as f64 / 2.0 - s / 2.0, s, s)
            }
        })
        .collect()
}

fn distractor_boxes(cfg: &SynthConfig) -> Vec<BoundingBox> {
    let Scenario::Clutter { distractors } = cfg.scenario else {
        return Vec::new();
    };
    let s = cfg.target_size * 0.9;
    let per_row = distractors.div_ceil(2);
    let margin = 4.0;
    (0..distractors)
        .map(|i| {
            let row = i % 2;
            let col = i / 2;
            let slot = (cfg.width as f64 - 2.0 * margin) / per_row as f64;
            let x = margin + slot * col as f64 + (slot - s) / 2.0;
            let y = if row == 0 {
                margin
            } else {
                cfg.height as f64 - margin - s
            };
            BoundingBox::new(x, y, s, s)
        })
        .collect()
}

fn occluder_for(cfg: &SynthConfig, frame: usize, gt: &BoundingBox) -> Option<BoundingBox> {
    let Scenario::Occlusion { start, end, coverage } = cfg.scenario else {
        return None;
    };
    // 1-based frame numbers
    if !(start..=end).contains(&(frame + 1)) {
        return None;
    }
    let pad = 3.0;
    let covered = gt.width * coverage;
    Some(BoundingBox::new(
        gt.x - pad,
        gt.y - pad,
        covered + if coverage >= 1.0 { 2.0 * pad } else { pad },
        gt.height + 2.0 * pad,
    ))
}

pub fn synth_sequence(cfg: &SynthConfig) -> Result<SynthSequence> {
    cfg.validate()?;
    let (w, h) = (cfg.width, cfg.height);
    let ground_truth = trajectory(cfg);
    let distractors = distractor_boxes(cfg);
    if let Some(b) = ground_truth.iter().chain(&distractors).find(|b| !inside(b, w, h)) {
        return Err(BenchError::Scenario(format!(
            "target leaves the {w}x{h} frame (box at {:.1},{:.1} size {:.1}x{:.1})",
            b.x, b.y, b.width, b.height
        )));
    }
    if distractors
        .iter()
        .any(|d| ground_truth.iter().any(|g| g.intersection_area(d) > 0.0))
    {
        return Err(BenchError::Scenario("distractors overlap the target path".into()));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let target = Texture::random(&mut rng);
    let distractor_textures: Vec<Texture> = distractors.iter().map(|_| Texture::random(&mut rng)).collect();
    let background = Background {
        phase: core::array::from_fn(|_| rng.random_range(0.0..TAU)),
    };
    let grain_seed: u64 = rng.random();
    let mut det_rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x5DEE_CE66_D1CE_4E5B);
    let noise = Normal::new(0.0, cfg.detection_jitter.max(1e-12)).expect("valid normal");

    let mut frames = Vec::with_capacity(cfg.frames);
    let mut detections = Vec::with_capacity(cfg.frames);
    let mut occluders = Vec::with_capacity(cfg.frames);
    let mut canvas = vec![[0.0; 3]; w * h];
    for (k, gt) in ground_truth.iter().enumerate() {
        for y in 0..h {
            for x in 0..w {
                canvas[y * w + x] = background.sample(x, y, grain_seed);
            }
        }
        for (d, t) in distractors.iter().zip(&distractor_textures) {
            paint(&mut canvas, w, h, d, t);
        }
        paint(&mut canvas, w, h, gt, &target);
        let occluder = occluder_for(cfg, k, gt);
        if let Some(o) = &occluder {
            fill(&mut canvas, w, h, o, [118.0, 118.0, 124.0]);
        }
        let data = canvas.iter().flat_map(|p| p.map(to_u8)).collect();
        frames.push(Image::new(w, h, 3, data)?);

        let mut dets = Vec::new();
        // draw the noise unconditionally so dropouts do not shift later frames
        let jitter: [f64; 4] = core::array::from_fn(|_| noise.sample(&mut det_rng));
        let missed = det_rng.random_bool(cfg.detection_dropout);
        if occluder.is_none() && !missed {
            let size_w = (gt.width + jitter[2]).max(4.0);
            let size_h = (gt.height + jitter[3]).max(4.0);
            let c = gt.center();
            dets.push(Detection {
                bbox: BoundingBox::new(
                    c.x + jitter[0] - size_w / 2.0,
                    c.y + jitter[1] - size_h / 2.0,
                    size_w,
                    size_h,
                ),
                score: 0.8,
            });
        }
        if let Some(d) = distractors.first() {
            dets.insert(0, Detection { bbox: *d, score: 0.95 });
        }
        detections.push(dets);
        occluders.push(occluder);
    }
    Ok(SynthSequence {
        frames,
        ground_truth,
        detections,
        occluders,
        distractors,
    })
}

/// Write frames, ground truth and detections in the OTB layout under `dir`.
pub fn write_sequence(seq: &SynthSequence, dir: &Path) -> Result<()> {
    let img_dir = dir.join(FRAME_DIR);
    fs::create_dir_all(&img_dir).map_err(|e| BenchError::io(&img_dir, e))?;
    for (i, frame) in seq.frames.iter().enumerate() {
        save_png(frame, &img_dir.join(format!("{:04}.png", i + 1)))?;
    }
    let gt = dir.join(GROUND_TRUTH_FILE);
    fs::write(&gt, format_boxes(&seq.ground_truth)).map_err(|e| BenchError::io(&gt, e))?;
    let det = dir.join(DETECTIONS_FILE);
    fs::write(&det, format_detections(&seq.detections)).map_err(|e| BenchError::io(&det, e))?;
    Ok(())
}

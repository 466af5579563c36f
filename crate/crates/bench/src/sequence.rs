//! OTB-style sequence directories and detection files.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use facetrack_core::BoundingBox;

use crate::{BenchError, Result};

pub const GROUND_TRUTH_FILE: &str = "groundtruth_rect.txt";
pub const FRAME_DIR: &str = "img";
/// Detections stored next to the frames are picked up automatically.
pub const DETECTIONS_FILE: &str = "detections.csv";

#[derive(Debug, Clone, PartialEq)]
pub struct SequenceSpec {
    pub name: String,
    pub frames: Vec<PathBuf>,
    pub ground_truth: Vec<BoundingBox>,
}

impl SequenceSpec {
    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Detection {
    pub bbox: BoundingBox,
    pub score: f64,
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| BenchError::io(path, e))
}

fn is_frame_file(path: &Path) -> bool {
    matches!(
        path.extension()
            .and_then(|e| e.to_str())
            .map(str::to_ascii_lowercase)
            .as_deref(),
        Some("png" | "jpg" | "jpeg")
    )
}

fn frame_number(path: &Path) -> Option<u64> {
    path.file_stem()?.to_str()?.parse().ok()
}

/// Numbered frames of `dir/img`, in numeric order.
pub fn list_frames(dir: &Path) -> Result<Vec<PathBuf>> {
    let img_dir = dir.join(FRAME_DIR);
    let entries = fs::read_dir(&img_dir).map_err(|e| BenchError::io(&img_dir, e))?;
    let mut frames = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| BenchError::io(&img_dir, e))?.path();
        if is_frame_file(&path) {
            if let Some(n) = frame_number(&path) {
                frames.push((n, path));
            }
        }
    }
    if frames.is_empty() {
        return Err(BenchError::NoFrames { path: img_dir });
    }
    frames.sort();
    Ok(frames.into_iter().map(|(_, p)| p).collect())
}

/// Parse `x,y,w,h` separated by commas, tabs or spaces.
pub fn parse_box(line: &str) -> std::result::Result<BoundingBox, String> {
    let fields: Vec<&str> = line
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|f| !f.is_empty())
        .collect();
    if fields.len() != 4 {
        return Err(format!("expected 4 fields, got {}", fields.len()));
    }
    let mut v = [0.0; 4];
    for (slot, f) in v.iter_mut().zip(&fields) {
        *slot = f.parse::<f64>().map_err(|_| format!("bad number {f:?}"))?;
        if !slot.is_finite() {
            return Err(format!("non-finite value {f:?}"));
        }
    }
    Ok(BoundingBox::new(v[0], v[1], v[2], v[3]))
}

/// One box per non-empty line.
pub fn load_boxes(path: &Path) -> Result<Vec<BoundingBox>> {
    let text = read(path)?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| parse_box(l).map_err(|m| BenchError::parse(path, i + 1, m)))
        .collect()
}

pub fn load_sequence(dir: &Path) -> Result<SequenceSpec> {
    let frames = list_frames(dir)?;
    let gt_path = dir.join(GROUND_TRUTH_FILE);
    let ground_truth = load_boxes(&gt_path)?;
    if ground_truth.len() != frames.len() {
        return Err(BenchError::CountMismatch {
            path: dir.to_path_buf(),
            frames: frames.len(),
            boxes: ground_truth.len(),
        });
    }
    let name = dir
        .file_name()
        .and_then(|n| n.to_str())
        .unwrap_or("sequence")
        .to_string();
    Ok(SequenceSpec {
        name,
        frames,
        ground_truth,
    })
}

pub fn format_boxes(boxes: &[BoundingBox]) -> String {
    let mut out = String::new();
    for b in boxes {
        let _ = writeln!(out, "{},{},{},{}", b.x, b.y, b.width, b.height);
    }
    out
}

/// Per-frame detections from `frame,x,y,w,h,score` rows, best first.
///
/// A leading header row is allowed. Frames past `n_frames` are an error.
pub fn load_detections(path: &Path, n_frames: usize) -> Result<Vec<Vec<Detection>>> {
    let text = read(path)?;
    let mut per_frame: Vec<Vec<Detection>> = vec![Vec::new(); n_frames];
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || (i == 0 && line.starts_with("frame")) {
            continue;
        }
        let err = |m: String| BenchError::parse(path, i + 1, m);
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 6 {
            return Err(err(format!("expected 6 fields, got {}", fields.len())));
        }
        let frame: usize = fields[0]
            .parse()
            .map_err(|_| err(format!("bad frame {:?}", fields[0])))?;
        if frame == 0 || frame > n_frames {
            return Err(err(format!("frame {frame} outside 1..={n_frames}")));
        }
        let mut v = [0.0f64; 5];
        for (slot, f) in v.iter_mut().zip(&fields[1..]) {
            *slot = f.parse().map_err(|_| err(format!("bad number {f:?}")))?;
            if !slot.is_finite() {
                return Err(err(format!("non-finite value {f:?}")));
            }
        }
        if v[2] <= 0.0 || v[3] <= 0.0 {
            return Err(err(format!("box size must be positive, got {}x{}", v[2], v[3])));
        }
        per_frame[frame - 1].push(Detection {
            bbox: BoundingBox::new(v[0], v[1], v[2], v[3]),
            score: v[4],
        });
    }
    for dets in &mut per_frame {
        dets.sort_by(|a, b| b.score.total_cmp(&a.score));
    }
    Ok(per_frame)
}

pub fn format_detections(per_frame: &[Vec<Detection>]) -> String {
    let mut out = String::from("frame,x,y,w,h,score\n");
    for (i, dets) in per_frame.iter().enumerate() {
        for d in dets {
            let b = d.bbox;
            let _ = writeln!(out, "{},{},{},{},{},{}", i + 1, b.x, b.y, b.width, b.height, d.score);
        }
    }
    out
}

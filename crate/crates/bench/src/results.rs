//! Tracking outputs: results CSV, curves CSV, summary JSON and overlays.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use facetrack_core::metrics::{success_threshold, EvalCurves};
use facetrack_core::{BoundingBox, Image};
use serde::{Deserialize, Serialize};

use crate::image_io::{load_image, save_png};
use crate::{BenchError, Result};

pub const RESULTS_HEADER: &str = "frame,x,y,w,h,score,occluded";

/// One row of a results file; `frame` is 0-based in memory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResultRow {
    pub frame: usize,
    pub bbox: BoundingBox,
    pub score: f64,
    pub occluded: bool,
}

pub fn format_results(rows: &[ResultRow]) -> String {
    let mut out = String::from(RESULTS_HEADER);
    out.push('\n');
    for r in rows {
        let b = r.bbox;
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.frame + 1,
            b.x,
            b.y,
            b.width,
            b.height,
            r.score,
            u8::from(r.occluded)
        );
    }
    out
}

pub fn write_results(path: &Path, rows: &[ResultRow]) -> Result<()> {
    fs::write(path, format_results(rows)).map_err(|e| BenchError::io(path, e))
}

pub fn parse_results(path: &Path, text: &str) -> Result<Vec<ResultRow>> {
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || (i == 0 && line.starts_with("frame")) {
            continue;
        }
        let err = |m: String| BenchError::parse(path, i + 1, m);
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 7 {
            return Err(err(format!("expected 7 fields, got {}", fields.len())));
        }
        let frame: usize = fields[0]
            .parse()
            .map_err(|_| err(format!("bad frame {:?}", fields[0])))?;
        if frame == 0 {
            return Err(err("frames are numbered from 1".into()));
        }
        let mut v = [0.0; 5];
        for (slot, f) in v.iter_mut().zip(&fields[1..6]) {
            *slot = f.parse().map_err(|_| err(format!("bad number {f:?}")))?;
        }
        let occluded = match fields[6] {
            "0" => false,
            "1" => true,
            other => return Err(err(format!("occluded must be 0 or 1, got {other:?}"))),
        };
        rows.push(ResultRow {
            frame: frame - 1,
            bbox: BoundingBox::new(v[0], v[1], v[2], v[3]),
            score: v[4],
            occluded,
        });
    }
    Ok(rows)
}

pub fn read_results(path: &Path) -> Result<Vec<ResultRow>> {
    let text = fs::read_to_string(path).map_err(|e| BenchError::io(path, e))?;
    parse_results(path, &text)
}

/// `curve,threshold,value` rows: 51 precision rows then 21 success rows.
pub fn format_curves(curves: &EvalCurves) -> String {
    let mut out = String::from("curve,threshold,value\n");
    for (t, v) in curves.precision.iter().enumerate() {
        let _ = writeln!(out, "precision,{t},{v}");
    }
    for (i, v) in curves.success.iter().enumerate() {
        let _ = writeln!(out, "success,{},{v}", success_threshold(i));
    }
    out
}

pub fn write_curves(path: &Path, curves: &EvalCurves) -> Result<()> {
    fs::write(path, format_curves(curves)).map_err(|e| BenchError::io(path, e))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub sequence: String,
    pub frames: usize,
    pub precision_at_20: f64,
    pub success_auc: f64,
    pub fps: f64,
}

pub fn write_summary(path: &Path, summary: &Summary) -> Result<()> {
    let text = serde_json::to_string_pretty(summary).expect("summary serializes");
    fs::write(path, text + "\n").map_err(|e| BenchError::io(path, e))
}

const RESULT_COLOR: [u8; 3] = [255, 40, 40];
const GT_COLOR: [u8; 3] = [40, 255, 40];

/// Draw a 2-pixel rectangle outline, clipped to the image.
pub fn draw_box(img: &mut Image, bbox: &BoundingBox, color: [u8; 3]) {
    let (w, h) = (img.width() as i64, img.height() as i64);
    let x0 = bbox.x.round() as i64;
    let y0 = bbox.y.round() as i64;
    let x1 = (bbox.x + bbox.width).round() as i64 - 1;
    let y1 = (bbox.y + bbox.height).round() as i64 - 1;
    let mut put = |x: i64, y: i64| {
        if (0..w).contains(&x) && (0..h).contains(&y) {
            for (c, &v) in color.iter().enumerate() {
                img.set(x as usize, y as usize, c, v);
            }
        }
    };
    for t in 0..2 {
        for x in x0..=x1 {
            put(x, y0 + t);
            put(x, y1 - t);
        }
        for y in y0..=y1 {
            put(x0 + t, y);
            put(x1 - t, y);
        }
    }
}

/// One PNG per frame with the result box in red and the ground truth in green.
pub fn write_overlays(
    frames: &[PathBuf],
    results: &[BoundingBox],
    ground_truth: &[BoundingBox],
    dir: &Path,
) -> Result<usize> {
    fs::create_dir_all(dir).map_err(|e| BenchError::io(dir, e))?;
    let mut written = 0;
    for (i, frame) in frames.iter().enumerate() {
        let mut img = load_image(frame)?;
        if let Some(gt) = ground_truth.get(i) {
            draw_box(&mut img, gt, GT_COLOR);
        }
        if let Some(r) = results.get(i) {
            draw_box(&mut img, r, RESULT_COLOR);
        }
        save_png(&img, &dir.join(format!("{:04}.png", i + 1)))?;
        written += 1;
    }
    Ok(written)
}

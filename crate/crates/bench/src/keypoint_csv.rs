//! Precomputed keypoints: `frame,x,y,scale,d0,...,d127` rows.
//!
//! Lets a run use descriptors from an external detector instead of the
//! built-in one. Descriptors are renormalized on load.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use facetrack_core::keypoints::{normalize_descriptor, DESCRIPTOR_LEN};
use facetrack_core::Keypoint;

use crate::{BenchError, Result};

pub fn load_keypoints(path: &Path, n_frames: usize) -> Result<Vec<Vec<Keypoint>>> {
    let text = fs::read_to_string(path).map_err(|e| BenchError::io(path, e))?;
    let mut per_frame = vec![Vec::new(); n_frames];
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || (i == 0 && line.starts_with("frame")) {
            continue;
        }
        let err = |m: String| BenchError::parse(path, i + 1, m);
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 4 + DESCRIPTOR_LEN {
            return Err(err(format!(
                "expected {} fields, got {}",
                4 + DESCRIPTOR_LEN,
                fields.len()
            )));
        }
        let frame: usize = fields[0]
            .parse()
            .map_err(|_| err(format!("bad frame {:?}", fields[0])))?;
        if frame == 0 || frame > n_frames {
            return Err(err(format!("frame {frame} outside 1..={n_frames}")));
        }
        let mut geo = [0.0f64; 3];
        for (slot, f) in geo.iter_mut().zip(&fields[1..4]) {
            *slot = f.parse().map_err(|_| err(format!("bad number {f:?}")))?;
        }
        let mut descriptor = fields[4..]
            .iter()
            .map(|f| f.parse::<f32>().map_err(|_| err(format!("bad descriptor value {f:?}"))))
            .collect::<Result<Vec<f32>>>()?;
        if !geo.iter().all(|v| v.is_finite()) || !normalize_descriptor(&mut descriptor) {
            return Err(err("non-finite position or zero descriptor".into()));
        }
        per_frame[frame - 1].push(Keypoint {
            x: geo[0],
            y: geo[1],
            scale: geo[2],
            descriptor,
        });
    }
    Ok(per_frame)
}

pub fn format_keypoints(per_frame: &[Vec<Keypoint>]) -> String {
    let mut out = String::from("frame,x,y,scale");
    for i in 0..DESCRIPTOR_LEN {
        let _ = write!(out, ",d{i}");
    }
    out.push('\n');
    for (f, kps) in per_frame.iter().enumerate() {
        for k in kps {
            let _ = write!(out, "{},{},{},{}", f + 1, k.x, k.y, k.scale);
            for d in &k.descriptor {
                let _ = write!(out, ",{d}");
            }
            out.push('\n');
        }
    }
    out
}

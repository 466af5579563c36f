//! Files, synthetic scenarios and evaluation around `facetrack-core`.
//!
//! Sequences use the OTB layout: an `img/` directory of numbered frames and a
//! `groundtruth_rect.txt` with one `x,y,w,h` box per frame. Frame numbers are
//! 1-based in every file and 0-based in memory.

pub mod config;
mod error;
pub mod image_io;
pub mod keypoint_csv;
pub mod results;
pub mod runner;
pub mod sequence;
pub mod synth;

pub use error::{BenchError, Result};

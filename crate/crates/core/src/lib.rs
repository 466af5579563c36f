//! Face tracking with multiple cooperating appearance models.
//!
//! The tracker combines three models of the target:
//!
//! - a star-shaped keypoint graph ([`grm`]) whose nodes remember their offset
//!   to the target center and vote for it in a kernel response map,
//! - a center-weighted color histogram ([`icm`]),
//! - a grid of 16-bit local binary similarity codes ([`bdm`]).
//!
//! Each frame, candidate boxes are generated around the voted center (plus an
//! optional external detection), scored by all three models and fused with
//! variance-ranked weights ([`fusion`]). The [`tracker`] module drives the
//! per-frame loop, including occlusion handling and model maintenance.
//!
//! The crate is `no_std` (it needs `alloc`). Decoding images, reading
//! sequences and the command line live in the `facetrack-bench` crate.
#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod bdm;
mod error;
pub mod fusion;
mod geometry;
pub mod grm;
pub mod icm;
pub mod imaging;
pub mod keypoints;
mod math;
pub mod metrics;
pub mod tracker;

pub use error::{Error, Result};
pub use geometry::{BoundingBox, Point};
pub use imaging::Image;
pub use keypoints::{Keypoint, Match};
pub use tracker::{TrackResult, Tracker, TrackerConfig, TrackerState};

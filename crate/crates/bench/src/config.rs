//! Tracker configuration files.
//!
//! Flat `key = value` lines whose keys are the `TrackerConfig` field names;
//! detector settings go under a `[detector]` table. Missing keys keep their
//! defaults and unknown keys are rejected.

use std::fs;
use std::path::Path;

use facetrack_core::TrackerConfig;

use crate::{BenchError, Result};

pub fn parse_config(path: &Path, text: &str) -> Result<TrackerConfig> {
    let cfg: TrackerConfig = toml::from_str(text).map_err(|e| BenchError::Config {
        path: path.to_path_buf(),
        message: e.message().to_string(),
    })?;
    cfg.validate().map_err(|e| BenchError::Config {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    Ok(cfg)
}

pub fn load_config(path: &Path) -> Result<TrackerConfig> {
    let text = fs::read_to_string(path).map_err(|e| BenchError::io(path, e))?;
    parse_config(path, &text)
}

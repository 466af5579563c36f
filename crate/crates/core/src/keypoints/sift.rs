//! Difference-of-Gaussians detector with a 4x4x8 gradient-histogram descriptor.
//!
//! Descriptors are upright (no dominant-orientation assignment): the tracked
//! target is assumed to keep its in-plane orientation between frames.

use alloc::vec;
use alloc::vec::Vec;
use core::f32::consts::PI;

use super::{normalize_descriptor, Keypoint};
use crate::imaging::Image;
use crate::math;
use crate::{Error, Result};

pub const DESCRIPTOR_LEN: usize = 128;

const MIN_DIMENSION: usize = 16;
const HIST_CELLS: usize = 4;
const ORI_BINS: usize = 8;
const CELL_WIDTH: f32 = 3.0;
const MAGNITUDE_CLAMP: f32 = 0.2;
const ASSUMED_BLUR: f32 = 0.5;
const MAX_REFINE_STEPS: usize = 5;

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct DetectorConfig {
    /// Upper bound on pyramid octaves; fewer are built for small images.
    pub octaves: usize,
    pub scales_per_octave: usize,
    /// Blur of the first level of each octave.
    pub sigma: f32,
    /// Minimum |DoG| response (on a [0, 1] intensity scale), divided by
    /// `scales_per_octave`.
    pub contrast_threshold: f32,
    /// Maximum principal-curvature ratio before a point counts as an edge.
    pub edge_threshold: f32,
    pub max_keypoints: usize,
    /// Extrema closer than this to an octave border are discarded.
    pub border: usize,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        Self {
            octaves: 4,
            scales_per_octave: 3,
            sigma: 1.6,
            contrast_threshold: 0.04,
            edge_threshold: 10.0,
            max_keypoints: 500,
            border: 5,
        }
    }
}

#[derive(Clone)]
struct Plane {
    width: usize,
    height: usize,
    data: Vec<f32>,
}

impl Plane {
    fn zeros(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            data: vec![0.0; width * height],
        }
    }

    #[inline]
    fn at(&self, x: usize, y: usize) -> f32 {
        self.data[y * self.width + x]
    }

    fn downsample(&self) -> Plane {
        let (w, h) = (self.width / 2, self.height / 2);
        let mut out = Plane::zeros(w, h);
        for y in 0..h {
            for x in 0..w {
                out.data[y * w + x] = self.at(2 * x, 2 * y);
            }
        }
        out
    }

    fn blurred(&self, sigma: f32) -> Plane {
        if sigma <= 0.0 {
            return self.clone();
        }
        let radius = math::ceilf(3.0 * sigma).max(1.0) as isize;
        let mut kernel: Vec<f32> = (-radius..=radius)
            .map(|i| math::expf(-((i * i) as f32) / (2.0 * sigma * sigma)))
            .collect();
        let total: f32 = kernel.iter().sum();
        for k in &mut kernel {
            *k /= total;
        }
        let (w, h) = (self.width as isize, self.height as isize);
        let mut tmp = Plane::zeros(self.width, self.height);
        for y in 0..h {
            let row = &self.data[(y * w) as usize..((y + 1) * w) as usize];
            for x in 0..w {
                let mut acc = 0.0;
                for (k, &kv) in kernel.iter().enumerate() {
                    let sx = (x + k as isize - radius).clamp(0, w - 1);
                    acc += kv * row[sx as usize];
                }
                tmp.data[(y * w + x) as usize] = acc;
            }
        }
        let mut out = Plane::zeros(self.width, self.height);
        for y in 0..h {
            for x in 0..w {
                let mut acc = 0.0;
                for (k, &kv) in kernel.iter().enumerate() {
                    let sy = (y + k as isize - radius).clamp(0, h - 1);
                    acc += kv * tmp.data[(sy * w + x) as usize];
                }
                out.data[(y * w + x) as usize] = acc;
            }
        }
        out
    }
}

struct Octave {
    gaussians: Vec<Plane>,
    dogs: Vec<Plane>,
}

struct Candidate {
    octave: usize,
    layer: usize,
    x: f32,
    y: f32,
    // fractional layer, octave-relative
    sublayer: f32,
    response: f32,
}

/// Detect DoG extrema over an octave pyramid and describe each with a
/// 128-dimensional gradient-orientation histogram.
///
/// Output is sorted by descending response (ties by position) and truncated
/// to `cfg.max_keypoints`; identical input yields identical output.
pub fn detect_and_describe(gray: &Image, cfg: &DetectorConfig) -> Result<Vec<Keypoint>> {
    if gray.channels() != 1 {
        return Err(Error::ChannelMismatch {
            expected: 1,
            actual: gray.channels(),
        });
    }
    if gray.width().min(gray.height()) < MIN_DIMENSION {
        return Err(Error::ImageTooSmall {
            width: gray.width(),
            height: gray.height(),
            min: MIN_DIMENSION,
        });
    }
    if cfg.scales_per_octave == 0 || cfg.octaves == 0 {
        return Err(Error::InvalidConfig("detector needs at least one octave and scale"));
    }

    let base = Plane {
        width: gray.width(),
        height: gray.height(),
        data: gray.data().iter().map(|&v| f32::from(v) / 255.0).collect(),
    };
    let pyramid = build_pyramid(base, cfg);

    let mut found = Vec::new();
    for (o, octave) in pyramid.iter().enumerate() {
        find_extrema(octave, o, cfg, &mut found);
    }

    let mut keypoints: Vec<(f32, Keypoint)> = found
        .into_iter()
        .filter_map(|c| {
            let octave = &pyramid[c.octave];
            let descriptor = describe(&octave.gaussians[c.layer], c.x, c.y, layer_sigma(cfg, c.sublayer))?;
            let factor = (1usize << c.octave) as f64;
            let kp = Keypoint {
                x: f64::from(c.x) * factor,
                y: f64::from(c.y) * factor,
                scale: f64::from(layer_sigma(cfg, c.sublayer)) * factor,
                descriptor,
            };
            Some((c.response, kp))
        })
        .collect();

    keypoints.sort_by(|a, b| {
        b.0.total_cmp(&a.0)
            .then(a.1.y.total_cmp(&b.1.y))
            .then(a.1.x.total_cmp(&b.1.x))
            .then(a.1.scale.total_cmp(&b.1.scale))
    });
    keypoints.truncate(cfg.max_keypoints);
    Ok(keypoints.into_iter().map(|(_, kp)| kp).collect())
}

fn layer_sigma(cfg: &DetectorConfig, layer: f32) -> f32 {
    cfg.sigma * math::exp2f(layer / cfg.scales_per_octave as f32)
}

fn build_pyramid(base: Plane, cfg: &DetectorConfig) -> Vec<Octave> {
    let s = cfg.scales_per_octave;
    let initial = (cfg.sigma * cfg.sigma - ASSUMED_BLUR * ASSUMED_BLUR).max(0.01);
    let mut first = base.blurred(math::sqrtf(initial));

    let mut octaves = Vec::new();
    for o in 0..cfg.octaves {
        if o > 0 {
            let prev: &Octave = octaves.last().expect("previous octave");
            let next = prev.gaussians[s].downsample();
            if next.width.min(next.height) < MIN_DIMENSION {
                break;
            }
            first = next;
        }
        let mut gaussians = Vec::with_capacity(s + 3);
        gaussians.push(first.clone());
        for i in 1..s + 3 {
            let prev_sigma = layer_sigma(cfg, (i - 1) as f32);
            let cur_sigma = layer_sigma(cfg, i as f32);
            let inc = math::sqrtf(cur_sigma * cur_sigma - prev_sigma * prev_sigma);
            let next = gaussians[i - 1].blurred(inc);
            gaussians.push(next);
        }
        let dogs = gaussians
            .windows(2)
            .map(|pair| Plane {
                width: pair[0].width,
                height: pair[0].height,
                data: pair[1].data.iter().zip(&pair[0].data).map(|(b, a)| b - a).collect(),
            })
            .collect();
        octaves.push(Octave { gaussians, dogs });
    }
    octaves
}

fn find_extrema(octave: &Octave, o: usize, cfg: &DetectorConfig, out: &mut Vec<Candidate>) {
    let s = cfg.scales_per_octave;
    let threshold = cfg.contrast_threshold / s as f32;
    let prelim = 0.5 * threshold;
    let (w, h) = (octave.dogs[0].width, octave.dogs[0].height);
    let border = cfg.border.max(1);
    if w <= 2 * border || h <= 2 * border {
        return;
    }
    for layer in 1..=s {
        let (below, cur, above) = (&octave.dogs[layer - 1], &octave.dogs[layer], &octave.dogs[layer + 1]);
        for y in border..h - border {
            for x in border..w - border {
                let v = cur.at(x, y);
                if v.abs() <= prelim || !is_extremum(v, x, y, below, cur, above) {
                    continue;
                }
                if let Some(c) = refine(octave, o, x, y, layer, cfg, threshold) {
                    out.push(c);
                }
            }
        }
    }
}

fn is_extremum(v: f32, x: usize, y: usize, below: &Plane, cur: &Plane, above: &Plane) -> bool {
    let mut is_max = true;
    let mut is_min = true;
    for plane in [below, cur, above] {
        for yy in y - 1..=y + 1 {
            for xx in x - 1..=x + 1 {
                if core::ptr::eq(plane, cur) && xx == x && yy == y {
                    continue;
                }
                let n = plane.at(xx, yy);
                is_max &= v > n;
                is_min &= v < n;
                if !is_max && !is_min {
                    return false;
                }
            }
        }
    }
    is_max || is_min
}

// Quadratic interpolation of the extremum location in (x, y, layer), followed
// by the contrast and edge-response tests.
fn refine(
    octave: &Octave,
    o: usize,
    mut x: usize,
    mut y: usize,
    mut layer: usize,
    cfg: &DetectorConfig,
    threshold: f32,
) -> Option<Candidate> {
    let s = cfg.scales_per_octave;
    let (w, h) = (octave.dogs[0].width, octave.dogs[0].height);
    let border = cfg.border.max(1);
    for _ in 0..MAX_REFINE_STEPS {
        let d = |l: usize, xx: usize, yy: usize| octave.dogs[l].at(xx, yy);
        let v = d(layer, x, y);
        let gx = 0.5 * (d(layer, x + 1, y) - d(layer, x - 1, y));
        let gy = 0.5 * (d(layer, x, y + 1) - d(layer, x, y - 1));
        let gs = 0.5 * (d(layer + 1, x, y) - d(layer - 1, x, y));
        let dxx = d(layer, x + 1, y) + d(layer, x - 1, y) - 2.0 * v;
        let dyy = d(layer, x, y + 1) + d(layer, x, y - 1) - 2.0 * v;
        let dss = d(layer + 1, x, y) + d(layer - 1, x, y) - 2.0 * v;
        let dxy =
            0.25 * (d(layer, x + 1, y + 1) - d(layer, x - 1, y + 1) - d(layer, x + 1, y - 1) + d(layer, x - 1, y - 1));
        let dxs =
            0.25 * (d(layer + 1, x + 1, y) - d(layer + 1, x - 1, y) - d(layer - 1, x + 1, y) + d(layer - 1, x - 1, y));
        let dys =
            0.25 * (d(layer + 1, x, y + 1) - d(layer + 1, x, y - 1) - d(layer - 1, x, y + 1) + d(layer - 1, x, y - 1));

        let hessian = [[dxx, dxy, dxs], [dxy, dyy, dys], [dxs, dys, dss]];
        let offset = solve3(hessian, [-gx, -gy, -gs])?;

        if offset.iter().all(|o| o.abs() < 0.5) {
            let value = v + 0.5 * (gx * offset[0] + gy * offset[1] + gs * offset[2]);
            if value.abs() < threshold {
                return None;
            }
            let trace = dxx + dyy;
            let det = dxx * dyy - dxy * dxy;
            let r = cfg.edge_threshold;
            if det <= 0.0 || trace * trace * r >= (r + 1.0) * (r + 1.0) * det {
                return None;
            }
            return Some(Candidate {
                octave: o,
                layer,
                x: x as f32 + offset[0],
                y: y as f32 + offset[1],
                sublayer: layer as f32 + offset[2],
                response: value.abs(),
            });
        }

        let step = |p: usize, off: f32| (p as f32 + math::roundf(off)) as isize;
        let (nx, ny, nl) = (step(x, offset[0]), step(y, offset[1]), step(layer, offset[2]));
        if nl < 1
            || nl > s as isize
            || nx < border as isize
            || ny < border as isize
            || nx >= (w - border) as isize
            || ny >= (h - border) as isize
        {
            return None;
        }
        x = nx as usize;
        y = ny as usize;
        layer = nl as usize;
    }
    None
}

fn solve3(m: [[f32; 3]; 3], b: [f32; 3]) -> Option<[f32; 3]> {
    let det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    if det.abs() < 1e-12 || !det.is_finite() {
        return None;
    }
    let replace = |col: usize| {
        let mut c = m;
        for r in 0..3 {
            c[r][col] = b[r];
        }
        c[0][0] * (c[1][1] * c[2][2] - c[1][2] * c[2][1]) - c[0][1] * (c[1][0] * c[2][2] - c[1][2] * c[2][0])
            + c[0][2] * (c[1][0] * c[2][1] - c[1][1] * c[2][0])
    };
    let x = [replace(0) / det, replace(1) / det, replace(2) / det];
    x.iter().all(|v| v.is_finite()).then_some(x)
}

fn describe(img: &Plane, x: f32, y: f32, sigma: f32) -> Option<Vec<f32>> {
    let d = HIST_CELLS as f32;
    let hist_width = CELL_WIDTH * sigma;
    let radius = math::roundf(hist_width * core::f32::consts::SQRT_2 * (d + 1.0) * 0.5) as isize;
    let weight_denom = 2.0 * (0.5 * d) * (0.5 * d);
    let (xi, yi) = (math::roundf(x) as isize, math::roundf(y) as isize);
    let (fx, fy) = (x - xi as f32, y - yi as f32);
    let (w, h) = (img.width as isize, img.height as isize);

    // (HIST_CELLS + 2)^2 x ORI_BINS with a one-cell guard ring.
    let side = HIST_CELLS + 2;
    let mut hist = vec![0.0f32; side * side * ORI_BINS];

    for dy in -radius..=radius {
        for dx in -radius..=radius {
            let cx = (dx as f32 - fx) / hist_width;
            let cy = (dy as f32 - fy) / hist_width;
            let cbin = cx + 0.5 * d - 0.5;
            let rbin = cy + 0.5 * d - 0.5;
            if cbin <= -1.0 || cbin >= d || rbin <= -1.0 || rbin >= d {
                continue;
            }
            let (px, py) = (xi + dx, yi + dy);
            if px < 1 || py < 1 || px >= w - 1 || py >= h - 1 {
                continue;
            }
            let (px, py) = (px as usize, py as usize);
            let gx = img.at(px + 1, py) - img.at(px - 1, py);
            let gy = img.at(px, py + 1) - img.at(px, py - 1);
            let magnitude = math::sqrtf(gx * gx + gy * gy);
            if magnitude == 0.0 {
                continue;
            }
            let mut angle = math::atan2f(gy, gx);
            if angle < 0.0 {
                angle += 2.0 * PI;
            }
            let weight = math::expf(-(cx * cx + cy * cy) / weight_denom) * magnitude;
            let obin = angle * ORI_BINS as f32 / (2.0 * PI);

            let (r0, c0, o0) = (math::floorf(rbin), math::floorf(cbin), math::floorf(obin));
            let (dr, dc, dob) = (rbin - r0, cbin - c0, obin - o0);
            for (ri, rw) in [(0isize, 1.0 - dr), (1, dr)] {
                let r = r0 as isize + ri + 1;
                for (ci, cw) in [(0isize, 1.0 - dc), (1, dc)] {
                    let c = c0 as isize + ci + 1;
                    for (oi, ow) in [(0usize, 1.0 - dob), (1, dob)] {
                        let ob = (o0 as usize + oi) % ORI_BINS;
                        let idx = ((r as usize) * side + c as usize) * ORI_BINS + ob;
                        hist[idx] += weight * rw * cw * ow;
                    }
                }
            }
        }
    }

    let mut descriptor = Vec::with_capacity(DESCRIPTOR_LEN);
    for r in 1..=HIST_CELLS {
        for c in 1..=HIST_CELLS {
            let start = (r * side + c) * ORI_BINS;
            descriptor.extend_from_slice(&hist[start..start + ORI_BINS]);
        }
    }
    if !normalize_descriptor(&mut descriptor) {
        return None;
    }
    for v in &mut descriptor {
        *v = v.min(MAGNITUDE_CLAMP);
    }
    normalize_descriptor(&mut descriptor).then_some(descriptor)
}

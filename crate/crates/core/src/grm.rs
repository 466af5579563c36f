//! The keypoint graph: a star of nodes around the target center.
//!
//! Every node stores the offset from its keypoint to the center (at the
//! reference scale), the keypoint descriptor and an importance weight. Matched
//! nodes vote for the center in a [`KernelResponseMap`]; the peak of the map is
//! the new center. Node weights then adapt to how well each node predicted it.

use alloc::vec;
use alloc::vec::Vec;

use crate::geometry::{BoundingBox, Point};
use crate::keypoints::{Keypoint, Match};
use crate::math;
use crate::{Error, Result};

pub const DEFAULT_ETA: f64 = 0.005;
pub const DEFAULT_MAX_NODES: usize = 400;

#[derive(Debug, Clone, PartialEq)]
pub struct GraphNode {
    /// Keypoint-to-center offset at the reference scale: `position + fdl = center`.
    pub fdl: Point,
    pub descriptor: Vec<f32>,
    /// Importance in `[0, 1]`.
    pub weight: f64,
    /// Where the keypoint was last seen; the reference for pairwise scale ratios.
    pub ref_position: Point,
}

/// Initial node weight: `max(1 - eta * |fdl|, 0.5)`.
pub fn isotropic_weight(fdl: Point, eta: f64) -> f64 {
    (1.0 - eta * fdl.norm()).max(0.5)
}

/// Center predicted by a node matched at `matched`, with the offset scaled by
/// the cumulative scale factor.
pub fn predict_center(node: &GraphNode, matched: Point, scale: f64) -> Point {
    matched + node.fdl * scale
}

/// Weight-adaptation parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightUpdate {
    /// Learning rate for matched nodes.
    pub tau: f64,
    /// Rate of the distance falloff `theta(l) = max(1 - eta * l, 0)`.
    pub eta: f64,
    /// Nodes whose weight drops below this are removed.
    pub gamma: f64,
    /// Unmatched nodes are multiplied by `1 - unmatched_decay`.
    pub unmatched_decay: f64,
    /// When false, weights adapt but no node is removed.
    pub prune: bool,
}

impl Default for WeightUpdate {
    fn default() -> Self {
        Self {
            tau: 0.9,
            eta: DEFAULT_ETA,
            gamma: 0.1,
            unmatched_decay: 0.9,
            prune: true,
        }
    }
}

/// `theta(l) = max(1 - eta * l, 0)`.
pub fn prediction_quality(l: f64, eta: f64) -> f64 {
    (1.0 - eta * l).max(0.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GraphRelationalModel {
    nodes: Vec<GraphNode>,
    ref_scale: f64,
    max_nodes: usize,
}

/// Build the graph from the keypoints found inside the initialization box.
pub fn build_grm(kps: &[Keypoint], bbox: &BoundingBox, eta: f64, max_nodes: usize) -> Result<GraphRelationalModel> {
    if kps.is_empty() {
        return Err(Error::NoKeypoints);
    }
    let mut grm = GraphRelationalModel {
        nodes: Vec::with_capacity(kps.len().min(max_nodes)),
        ref_scale: 1.0,
        max_nodes: max_nodes.max(1),
    };
    grm.add_keypoints(kps, bbox, 1.0, eta);
    Ok(grm)
}

impl GraphRelationalModel {
    /// A graph holding `nodes` as given, e.g. restored from a saved model.
    /// Weights must lie in `[0, 1]` and the count must not exceed `max_nodes`.
    pub fn from_nodes(nodes: Vec<GraphNode>, max_nodes: usize) -> Result<Self> {
        if max_nodes == 0 || nodes.len() > max_nodes {
            return Err(Error::InvalidConfig("node count exceeds max_nodes"));
        }
        if nodes
            .iter()
            .any(|n| !(0.0..=1.0).contains(&n.weight) || !n.fdl.is_finite())
        {
            return Err(Error::InvalidConfig("node weight outside [0, 1] or non-finite offset"));
        }
        Ok(Self {
            nodes,
            ref_scale: 1.0,
            max_nodes,
        })
    }

    pub fn nodes(&self) -> &[GraphNode] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn ref_scale(&self) -> f64 {
        self.ref_scale
    }

    pub fn max_nodes(&self) -> usize {
        self.max_nodes
    }

    pub fn descriptors(&self) -> Vec<&[f32]> {
        self.nodes.iter().map(|n| n.descriptor.as_slice()).collect()
    }

    pub fn ref_positions(&self) -> Vec<Point> {
        self.nodes.iter().map(|n| n.ref_position).collect()
    }

    /// Scale every weight by `factor`, clamped to `[0, 1]`.
    pub fn scale_weights(&mut self, factor: f64) {
        for n in &mut self.nodes {
            n.weight = (n.weight * factor).clamp(0.0, 1.0);
        }
    }

    /// Record the matched positions as the new scale references.
    pub fn refresh_positions(&mut self, matches: &[Match]) {
        for m in matches {
            if let Some(node) = self.nodes.get_mut(m.model_index) {
                node.ref_position = m.position;
            }
        }
    }

    /// Long-term weight adaptation followed by pruning of weak nodes.
    ///
    /// Matched nodes move toward `theta(l)`, where `l` is the distance between
    /// their predicted center and `center`; unmatched nodes decay.
    pub fn update_weights(&mut self, matches: &[Match], center: Point, scale: f64, params: &WeightUpdate) {
        let mut matched_at: Vec<Option<Point>> = vec![None; self.nodes.len()];
        for m in matches {
            if let Some(slot) = matched_at.get_mut(m.model_index) {
                *slot = Some(m.position);
            }
        }
        for (node, seen) in self.nodes.iter_mut().zip(&matched_at) {
            node.weight = match seen {
                Some(pos) => {
                    let l = predict_center(node, *pos, scale).distance(center);
                    (1.0 - params.tau) * node.weight + params.tau * prediction_quality(l, params.eta)
                }
                None => (1.0 - params.unmatched_decay) * node.weight,
            };
        }
        if params.prune {
            self.nodes.retain(|n| n.weight >= params.gamma);
        }
    }

    /// Insert one node per keypoint, with offsets normalized to the reference
    /// scale. When the graph would exceed `max_nodes`, the lowest-weight nodes
    /// are evicted (newest first among equal weights).
    pub fn add_keypoints(&mut self, kps: &[Keypoint], bbox: &BoundingBox, scale: f64, eta: f64) {
        if kps.is_empty() {
            return;
        }
        let center = bbox.center();
        for kp in kps {
            let fdl = (center - kp.position()) * (1.0 / scale);
            self.nodes.push(GraphNode {
                fdl,
                descriptor: kp.descriptor.clone(),
                weight: isotropic_weight(fdl, eta),
                ref_position: kp.position(),
            });
        }
        if self.nodes.len() > self.max_nodes {
            let mut order: Vec<usize> = (0..self.nodes.len()).collect();
            // strongest first, oldest first among ties
            order.sort_by(|&a, &b| self.nodes[b].weight.total_cmp(&self.nodes[a].weight).then(a.cmp(&b)));
            let mut keep = vec![false; self.nodes.len()];
            for &i in &order[..self.max_nodes] {
                keep[i] = true;
            }
            let mut idx = 0;
            self.nodes.retain(|_| {
                let k = keep[idx];
                idx += 1;
                k
            });
        }
    }
}

/// Gaussian and exponential kernel settings for vote accumulation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelConfig {
    pub sigma: f64,
    /// Side of the square Gaussian stamp (odd).
    pub window: usize,
    /// Denominator of the proximity kernel `exp(-|c - prev| / theta)`.
    pub theta: f64,
}

impl Default for KernelConfig {
    fn default() -> Self {
        Self {
            sigma: 6.0,
            window: 5,
            theta: 8000.0,
        }
    }
}

impl KernelConfig {
    /// Unnormalized Gaussian value at integer offset `(dx, dy)`.
    pub fn gaussian(&self, dx: i64, dy: i64) -> f64 {
        let r2 = (dx * dx + dy * dy) as f64;
        math::exp(-r2 / (2.0 * self.sigma * self.sigma))
    }

    /// Proximity factor for a vote at `predicted` given the previous center.
    pub fn proximity(&self, predicted: Point, prev_center: Point) -> f64 {
        math::exp(-predicted.distance(prev_center) / self.theta)
    }
}

/// Frame-sized accumulator of weighted center votes.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelResponseMap {
    width: usize,
    height: usize,
    values: Vec<f64>,
}

impl KernelResponseMap {
    pub fn zeros(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            values: vec![0.0; width * height],
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn at(&self, x: usize, y: usize) -> f64 {
        self.values[y * self.width + x]
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    /// Stamp one Gaussian window centered at the cell nearest `center`,
    /// scaled by `strength`. Votes whose cell lies outside the map are skipped.
    pub fn stamp(&mut self, center: Point, strength: f64, kernel: &KernelConfig) {
        let (cx, cy) = (math::round(center.x), math::round(center.y));
        if !(cx >= 0.0 && cy >= 0.0 && cx < self.width as f64 && cy < self.height as f64) {
            return;
        }
        let (cx, cy) = (cx as i64, cy as i64);
        let half = (kernel.window / 2) as i64;
        for dy in -half..=half {
            let y = cy + dy;
            if y < 0 || y >= self.height as i64 {
                continue;
            }
            for dx in -half..=half {
                let x = cx + dx;
                if x < 0 || x >= self.width as i64 {
                    continue;
                }
                self.values[y as usize * self.width + x as usize] += kernel.gaussian(dx, dy) * strength;
            }
        }
    }
}

/// Accumulate one kernel vote per match into a `width x height` map.
///
/// Each vote is centered at the node's predicted center and weighted by the
/// node weight times the proximity of that prediction to `prev_center`.
pub fn accumulate_responses(
    matches: &[Match],
    grm: &GraphRelationalModel,
    prev_center: Point,
    scale: f64,
    kernel: &KernelConfig,
    width: usize,
    height: usize,
) -> KernelResponseMap {
    let mut map = KernelResponseMap::zeros(width, height);
    for m in matches {
        let Some(node) = grm.nodes.get(m.model_index) else {
            continue;
        };
        let c = predict_center(node, m.position, scale);
        let strength = kernel.proximity(c, prev_center) * node.weight;
        map.stamp(c, strength, kernel);
    }
    map
}

/// Peak of the map. Ties go to the cell nearest `prev_center`, then to the
/// first cell in row-major order.
pub fn localize_center(map: &KernelResponseMap, prev_center: Point) -> Result<Point> {
    let mut best: Option<(f64, f64, Point)> = None;
    for y in 0..map.height {
        for x in 0..map.width {
            let v = map.values[y * map.width + x];
            if v <= 0.0 {
                continue;
            }
            let p = Point::new(x as f64, y as f64);
            let d = p.distance(prev_center);
            let better = match best {
                None => true,
                Some((bv, bd, _)) => v > bv || (v == bv && d < bd),
            };
            if better {
                best = Some((v, d, p));
            }
        }
    }
    best.map(|(_, _, p)| p).ok_or(Error::NoCenter)
}

/// Sub-cell position of a peak: the value-weighted centroid of the
/// `window x window` cells around `peak`. Falls back to `peak` when the
/// neighborhood holds no mass.
pub fn refine_peak(map: &KernelResponseMap, peak: Point, window: usize) -> Point {
    let half = (window / 2) as i64;
    let (px, py) = (math::round(peak.x) as i64, math::round(peak.y) as i64);
    let (mut sum, mut sx, mut sy) = (0.0, 0.0, 0.0);
    for y in (py - half).max(0)..=(py + half).min(map.height as i64 - 1) {
        for x in (px - half).max(0)..=(px + half).min(map.width as i64 - 1) {
            let v = map.values[y as usize * map.width + x as usize];
            sum += v;
            sx += v * x as f64;
            sy += v * y as f64;
        }
    }
    if sum > 0.0 {
        Point::new(sx / sum, sy / sum)
    } else {
        peak
    }
}

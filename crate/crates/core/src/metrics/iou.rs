use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::geom::{convex_intersection_area, Cylinder, Hobb};
use crate::model::Geometry;

fn vertical_overlap(a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.1.min(b.1) - a.0.max(b.0)).max(0.0)
}

/// Area shared by two circles.
pub fn circle_intersection_area(r1: f64, r2: f64, d: f64) -> f64 {
    if d >= r1 + r2 {
        return 0.0;
    }
    if d <= (r1 - r2).abs() {
        let r = r1.min(r2);
        return PI * r * r;
    }
    let a1 = ((d * d + r1 * r1 - r2 * r2) / (2.0 * d * r1)).clamp(-1.0, 1.0).acos();
    let a2 = ((d * d + r2 * r2 - r1 * r1) / (2.0 * d * r2)).clamp(-1.0, 1.0).acos();
    let k = ((-d + r1 + r2) * (d + r1 - r2) * (d - r1 + r2) * (d + r1 + r2)).max(0.0);
    r1 * r1 * a1 + r2 * r2 * a2 - 0.5 * k.sqrt()
}

pub fn box_intersection_volume(a: &Hobb, b: &Hobb) -> f64 {
    let h = vertical_overlap((a.z_min(), a.z_max()), (b.z_min(), b.z_max()));
    if h == 0.0 {
        return 0.0;
    }
    convex_intersection_area(&a.footprint(), &b.footprint()) * h
}

pub fn cylinder_intersection_volume(a: &Cylinder, b: &Cylinder) -> f64 {
    let h = vertical_overlap(
        (a.base_center.z, a.base_center.z + a.height),
        (b.base_center.z, b.base_center.z + b.height),
    );
    if h == 0.0 {
        return 0.0;
    }
    circle_intersection_area(a.radius, b.radius, a.base_center.xy().distance(&b.base_center.xy())) * h
}

/// Volumetric intersection over union. Boxes are only compared with boxes
/// and cylinders with cylinders; mixed pairs score 0.
pub fn iou_3d(a: &Geometry, b: &Geometry) -> f64 {
    let inter = match (a, b) {
        (Geometry::Box(x), Geometry::Box(y)) => box_intersection_volume(x, y),
        (Geometry::Cylinder(x), Geometry::Cylinder(y)) => cylinder_intersection_volume(x, y),
        _ => return 0.0,
    };
    let union = a.volume() + b.volume() - inter;
    if !(union > 0.0) {
        return if a == b { 1.0 } else { 0.0 };
    }
    (inter / union).clamp(0.0, 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MatchPair {
    pub pred: usize,
    pub gt: usize,
    pub iou: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchResult {
    pub pairs: Vec<MatchPair>,
    /// Sum of matched IoUs over `max(|pred|, |gt|)`; 1 when both are empty.
    pub mean_iou: f64,
}

/// Greedy one-to-one matching by descending IoU (ties by index). Unmatched
/// elements count as zero in the mean.
pub fn match_instances(pred: &[Geometry], gt: &[Geometry]) -> MatchResult {
    let denom = pred.len().max(gt.len());
    if denom == 0 {
        return MatchResult {
            pairs: Vec::new(),
            mean_iou: 1.0,
        };
    }
    let mut all = Vec::new();
    for (i, p) in pred.iter().enumerate() {
        for (j, g) in gt.iter().enumerate() {
            let iou = iou_3d(p, g);
            if iou > 0.0 {
                all.push(MatchPair { pred: i, gt: j, iou });
            }
        }
    }
    all.sort_by(|a, b| b.iou.total_cmp(&a.iou).then(a.pred.cmp(&b.pred)).then(a.gt.cmp(&b.gt)));
    let mut used_p = vec![false; pred.len()];
    let mut used_g = vec![false; gt.len()];
    let mut pairs = Vec::new();
    for m in all {
        if !used_p[m.pred] && !used_g[m.gt] {
            used_p[m.pred] = true;
            used_g[m.gt] = true;
            pairs.push(m);
        }
    }
    let mean_iou = pairs.iter().map(|m| m.iou).sum::<f64>() / denom as f64;
    MatchResult { pairs, mean_iou }
}

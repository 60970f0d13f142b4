//! Reconstruction quality: instance-matched 3D-IoU and class-level voxel IoU.

mod iou;
mod voxel;

pub use iou::{
    box_intersection_volume, circle_intersection_area, cylinder_intersection_volume, iou_3d, match_instances,
    MatchPair, MatchResult,
};
pub use voxel::{grid_origin, viou, voxelize, VoxelGrid};

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::cloud::SemanticClass;
use crate::model::BimModel;

pub const EVALUATED_CLASSES: [SemanticClass; 3] = [SemanticClass::Wall, SemanticClass::Door, SemanticClass::Column];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassReport {
    pub class: SemanticClass,
    pub n_pred: usize,
    pub n_gt: usize,
    pub iou_3d: f64,
    pub viou: f64,
    pub matches: Vec<MatchPair>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub voxel_size: f64,
    pub classes: Vec<ClassReport>,
    /// Means over the classes present in at least one model.
    pub mean_iou_3d: f64,
    pub mean_viou: f64,
}

impl EvalReport {
    pub fn class(&self, class: SemanticClass) -> Option<&ClassReport> {
        self.classes.iter().find(|c| c.class == class)
    }

    /// Plain-text table with one row per class and a mean row.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "voxel size: {} m", self.voxel_size);
        let _ = writeln!(s, "{:<8} {:>6} {:>6} {:>8} {:>8}", "class", "pred", "gt", "3D-IoU", "vIoU");
        for c in &self.classes {
            let _ = writeln!(
                s,
                "{:<8} {:>6} {:>6} {:>8.3} {:>8.3}",
                c.class.name(),
                c.n_pred,
                c.n_gt,
                c.iou_3d,
                c.viou
            );
        }
        let _ = writeln!(s, "{:<8} {:>6} {:>6} {:>8.3} {:>8.3}", "mean", "", "", self.mean_iou_3d, self.mean_viou);
        s
    }
}

/// Compares a reconstruction against a reference model class by class.
pub fn evaluate(pred: &BimModel, gt: &BimModel, voxel_size: f64) -> EvalReport {
    let classes: Vec<ClassReport> = EVALUATED_CLASSES
        .iter()
        .map(|&class| {
            let p = pred.geometries(class);
            let g = gt.geometries(class);
            let m = match_instances(&p, &g);
            ClassReport {
                class,
                n_pred: p.len(),
                n_gt: g.len(),
                iou_3d: m.mean_iou,
                viou: viou(&p, &g, voxel_size),
                matches: m.pairs,
            }
        })
        .collect();
    let present: Vec<&ClassReport> = classes.iter().filter(|c| c.n_pred + c.n_gt > 0).collect();
    let mean = |f: fn(&ClassReport) -> f64| {
        if present.is_empty() {
            1.0
        } else {
            present.iter().map(|c| f(c)).sum::<f64>() / present.len() as f64
        }
    };
    EvalReport {
        voxel_size,
        mean_iou_3d: mean(|c| c.iou_3d),
        mean_viou: mean(|c| c.viou),
        classes,
    }
}

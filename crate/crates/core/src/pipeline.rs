//! The full reconstruction: storeys, then walls, topology, doors and columns
//! per storey.

use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cloud::{LabeledPointCloud, SemanticClass};
use crate::columns::reconstruct_columns;
use crate::config::PipelineConfig;
use crate::doors::reconstruct_doors;
use crate::error::Result;
use crate::geom::{estimate_normals, Point3};
use crate::model::{BimModel, ColumnInstance, DoorInstance, ElementId, Provenance, WallInstance};
use crate::storey::{assign_storeys, detect_storeys, StoreyInterval};
use crate::topology::refine_topology;
use crate::walls::{
    assemble_wall_instances, cluster_walls_per_axis, hysac_planes, manhattan_angle_from_normals, split_by_direction,
    WallAxis,
};

/// Wall-clock seconds spent in each stage of one storey.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct StageTimings {
    pub walls: f64,
    pub topology: f64,
    pub doors: f64,
    pub columns: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct StoreyReport {
    pub index: usize,
    pub wall_points: usize,
    pub door_points: usize,
    pub column_points: usize,
    /// Manhattan frame rotation, radians; absent when it could not be found.
    pub frame_angle: Option<f64>,
    pub planes: usize,
    pub walls_before_topology: usize,
    pub topology_iterations: usize,
    pub topology_converged: bool,
    pub timings: StageTimings,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub storey_detection_seconds: f64,
    pub storeys: Vec<StoreyReport>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Reconstruction {
    pub model: BimModel,
    pub report: RunReport,
}

struct StoreyResult {
    walls: Vec<WallInstance>,
    doors: Vec<DoorInstance>,
    columns: Vec<ColumnInstance>,
    report: StoreyReport,
}

fn storey_seed(seed: u64, storey: usize) -> u64 {
    seed ^ (storey as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

fn reconstruct_storey(points: &[Point3], labels: &[SemanticClass], storey: usize, cfg: &PipelineConfig) -> Result<StoreyResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(storey_seed(cfg.seed, storey));
    let of = |class: SemanticClass| -> Vec<Point3> {
        points.iter().zip(labels).filter(|(_, l)| **l == class).map(|(p, _)| *p).collect()
    };
    let wall_pts = of(SemanticClass::Wall);
    let door_pts = of(SemanticClass::Door);
    let column_pts = of(SemanticClass::Column);
    let mut report = StoreyReport {
        index: storey,
        wall_points: wall_pts.len(),
        door_points: door_pts.len(),
        column_points: column_pts.len(),
        topology_converged: true,
        ..StoreyReport::default()
    };

    let t = Instant::now();
    let vtol = cfg.wall_vertical_normal_tol_deg.to_radians();
    let mut walls = Vec::new();
    let mut frame = None;
    if wall_pts.len() > cfg.normal_k {
        let normals = estimate_normals(&wall_pts, cfg.normal_k);
        frame = manhattan_angle_from_normals(&normals, vtol).ok();
        if let Some(angle) = frame {
            let (x_idx, y_idx) = split_by_direction(&normals, angle, vtol);
            let hysac = cfg.hysac();
            let assembly = cfg.assembly();
            for (axis, idx) in [(WallAxis::X, x_idx), (WallAxis::Y, y_idx)] {
                let axis_pts: Vec<Point3> = idx.iter().map(|&i| wall_pts[i]).collect();
                for cluster in cluster_walls_per_axis(&axis_pts, cfg.wall_dbscan_eps_m, cfg.wall_dbscan_min_pts) {
                    if cluster.len() < hysac.min_points {
                        continue;
                    }
                    let cpts = cluster.gather(&axis_pts);
                    let planes = hysac_planes(&cpts, &hysac, axis.perpendicular(angle), cfg.wall_seeding, &mut rng);
                    report.planes += planes.len();
                    walls.extend(assemble_wall_instances(
                        &planes,
                        &cpts,
                        points,
                        axis.direction(angle),
                        &assembly,
                        storey,
                    ));
                }
            }
        }
    }
    for (i, w) in walls.iter_mut().enumerate() {
        w.id = ElementId(i as u32);
    }
    report.frame_angle = frame;
    report.walls_before_topology = walls.len();
    report.timings.walls = t.elapsed().as_secs_f64();

    let t = Instant::now();
    if cfg.topology_refinement {
        let outcome = refine_topology(&walls, &cfg.topology());
        report.topology_iterations = outcome.iterations;
        report.topology_converged = outcome.converged;
        walls = outcome.walls;
    }
    report.timings.topology = t.elapsed().as_secs_f64();

    let t = Instant::now();
    let doors = reconstruct_doors(&door_pts, &walls, &cfg.doors())?;
    report.timings.doors = t.elapsed().as_secs_f64();

    let t = Instant::now();
    let columns = reconstruct_columns(&column_pts, frame, &cfg.columns(), &mut rng)
        .into_iter()
        .map(|shape| ColumnInstance {
            id: ElementId(0),
            storey,
            shape,
        })
        .collect();
    report.timings.columns = t.elapsed().as_secs_f64();

    Ok(StoreyResult {
        walls,
        doors,
        columns,
        report,
    })
}

/// Runs the whole pipeline. Storeys are processed in parallel on the current
/// rayon pool; the result does not depend on the number of threads.
pub fn reconstruct(cloud: &LabeledPointCloud, cfg: &PipelineConfig) -> Result<Reconstruction> {
    cfg.validate()?;
    cloud.validate()?;
    let t = Instant::now();
    let storeys: Vec<StoreyInterval> = detect_storeys(cloud, &cfg.storey())?;
    let assignment = assign_storeys(cloud, &storeys);
    let storey_detection_seconds = t.elapsed().as_secs_f64();

    let mut buckets: Vec<(Vec<Point3>, Vec<SemanticClass>)> = vec![(Vec::new(), Vec::new()); storeys.len()];
    for ((p, l), &s) in cloud.points.iter().zip(&cloud.labels).zip(&assignment) {
        buckets[s].0.push(*p);
        buckets[s].1.push(*l);
    }
    let results: Vec<StoreyResult> = buckets
        .par_iter()
        .enumerate()
        .map(|(i, (pts, labels))| reconstruct_storey(pts, labels, i, cfg))
        .collect::<Result<_>>()?;

    let mut model = BimModel::empty(Provenance {
        generator: format!("bimrecon {}", env!("CARGO_PKG_VERSION")),
        seed: cfg.seed,
        config: Some(cfg.clone()),
    });
    model.storeys = storeys;
    let mut next = 0u32;
    let mut wall_maps = Vec::new();
    for r in &results {
        let mut map = std::collections::BTreeMap::new();
        for w in &r.walls {
            map.insert(w.id, ElementId(next));
            model.walls.push(WallInstance {
                id: ElementId(next),
                ..w.clone()
            });
            next += 1;
        }
        wall_maps.push(map);
    }
    for (r, map) in results.iter().zip(&wall_maps) {
        for d in &r.doors {
            model.doors.push(DoorInstance {
                id: ElementId(next),
                parent_wall_id: map[&d.parent_wall_id],
                hobb: d.hobb,
            });
            next += 1;
        }
    }
    for r in &results {
        for c in &r.columns {
            model.columns.push(ColumnInstance {
                id: ElementId(next),
                ..c.clone()
            });
            next += 1;
        }
    }
    model.validate()?;
    Ok(Reconstruction {
        model,
        report: RunReport {
            storey_detection_seconds,
            storeys: results.into_iter().map(|r| r.report).collect(),
        },
    })
}

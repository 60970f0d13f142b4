//! Doors as children of walls: in-wall point assignment, expansion to nearby
//! door geometry, projection into the parent wall and splitting of wide boxes.

use std::collections::BTreeMap;

use crate::cloud::SemanticClass;
use crate::error::{Error, Result};
use crate::geom::{dbscan, Hobb, KdTree, Point3};
use crate::model::{DoorInstance, ElementId, WallInstance};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DoorParams {
    /// Tolerance of the in-wall test, meters.
    pub wall_margin: f64,
    /// Connectivity step for door clusters, meters.
    pub cluster_eps: f64,
    pub expansion_radius: f64,
    pub max_width: f64,
    pub split_spacing: f64,
    pub min_points: usize,
}

impl Default for DoorParams {
    fn default() -> Self {
        Self {
            wall_margin: 0.05,
            cluster_eps: 0.15,
            expansion_radius: 1.0,
            max_width: 1.4,
            split_spacing: 0.1,
            min_points: 50,
        }
    }
}

/// Door points assigned to walls, plus the points lying in no wall.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DoorCandidates {
    pub by_wall: BTreeMap<ElementId, Vec<usize>>,
    pub unassigned: Vec<usize>,
}

/// Assigns each door point to the wall box containing it (within `margin`).
/// A point inside several walls goes to the one with the smallest volume.
pub fn find_door_candidates(door_points: &[Point3], walls: &[WallInstance], margin: f64) -> DoorCandidates {
    let mut out = DoorCandidates::default();
    for (i, p) in door_points.iter().enumerate() {
        let host = walls
            .iter()
            .filter(|w| w.hobb.contains(p, margin))
            .min_by(|a, b| a.hobb.volume().total_cmp(&b.hobb.volume()).then(a.id.cmp(&b.id)));
        match host {
            Some(w) => out.by_wall.entry(w.id).or_default().push(i),
            None => out.unassigned.push(i),
        }
    }
    out
}

/// One door cluster inside a wall.
#[derive(Debug, Clone, PartialEq)]
pub struct DoorCluster {
    pub wall: ElementId,
    /// Indices into the door points; in-wall points first.
    pub point_indices: Vec<usize>,
}

/// Splits the in-wall points of every wall into connected clusters and grows
/// each cluster into the unassigned points.
///
/// An unassigned point joins a cluster when it is reachable from it in steps
/// of at most `eps` and lies within `expansion_radius` of the cluster's
/// in-wall points. Clusters grow breadth-first in lockstep; a point reached by
/// several clusters in the same step goes to the one listed first.
pub fn expand_door_cluster(
    door_points: &[Point3],
    candidates: &DoorCandidates,
    eps: f64,
    expansion_radius: f64,
) -> Vec<DoorCluster> {
    let mut clusters = Vec::new();
    for (&wall, indices) in &candidates.by_wall {
        let pts: Vec<Point3> = indices.iter().map(|&i| door_points[i]).collect();
        for c in dbscan(&pts, eps, 1, SemanticClass::Door) {
            clusters.push(DoorCluster {
                wall,
                point_indices: c.point_indices.iter().map(|&k| indices[k]).collect(),
            });
        }
    }
    if candidates.unassigned.is_empty() || clusters.is_empty() {
        return clusters;
    }

    let free: Vec<Point3> = candidates.unassigned.iter().map(|&i| door_points[i]).collect();
    let free_tree = KdTree::new(&free);
    let cores: Vec<Vec<Point3>> = clusters
        .iter()
        .map(|c| c.point_indices.iter().map(|&i| door_points[i]).collect())
        .collect();
    let core_trees: Vec<KdTree> = cores.iter().map(|c| KdTree::new(c)).collect();
    let r2 = expansion_radius * expansion_radius;

    let mut owner: Vec<Option<usize>> = vec![None; free.len()];
    let mut frontier: Vec<(usize, Point3)> = cores
        .iter()
        .enumerate()
        .flat_map(|(c, pts)| pts.iter().map(move |p| (c, *p)))
        .collect();
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for (c, p) in frontier {
            for u in free_tree.within_radius(&p, eps) {
                if owner[u].is_some() {
                    continue;
                }
                let near = core_trees[c].nearest_k(&free[u], 1);
                if near.first().is_some_and(|&(_, d2)| d2 <= r2) {
                    owner[u] = Some(c);
                    next.push((c, free[u]));
                }
            }
        }
        frontier = next;
    }
    for (k, o) in owner.iter().enumerate() {
        if let Some(c) = o {
            clusters[*c].point_indices.push(candidates.unassigned[k]);
        }
    }
    clusters
}

/// Aligns a door box with its parent wall: wall yaw, centre on the wall
/// centreline, depth equal to the wall thickness, the span along the wall
/// trimmed to the wall baseline and the vertical extent to the wall height.
pub fn project_into_wall(door: &Hobb, wall: &WallInstance) -> Hobb {
    let w = &wall.hobb;
    let (t, _) = w.local_xy(door.center_xy());
    let half_wall = 0.5 * w.length;
    let t0 = (t - 0.5 * door.length).max(-half_wall);
    let t1 = (t + 0.5 * door.length).min(half_wall);
    let (t0, t1) = if t1 > t0 { (t0, t1) } else { (t.clamp(-half_wall, half_wall), t.clamp(-half_wall, half_wall)) };
    let z0 = door.z_min().max(w.z_min());
    let z1 = door.z_max().min(w.z_max()).max(z0);
    let c = w.center_xy() + w.axis().scale(0.5 * (t0 + t1));
    Hobb {
        center: Point3::new(c.x, c.y, 0.5 * (z0 + z1)),
        length: t1 - t0,
        width: w.width,
        height: z1 - z0,
        yaw: w.yaw,
    }
}

/// Cuts a door wider than `max_width` into `n = ceil(width / max_width)`
/// equal doors separated by `spacing`, spread over the original span.
pub fn split_oversized(door: &Hobb, max_width: f64, spacing: f64) -> Result<Vec<Hobb>> {
    let width = door.length;
    if width <= max_width {
        return Ok(vec![*door]);
    }
    let n = (width / max_width - 1e-9).ceil().max(1.0) as usize;
    let piece = (width - (n - 1) as f64 * spacing) / n as f64;
    if !(piece > 0.0) {
        return Err(Error::InvalidSplit {
            width,
            max_width,
            spacing,
        });
    }
    let axis = door.axis();
    let c = door.center_xy();
    Ok((0..n)
        .map(|i| {
            let t = -0.5 * width + 0.5 * piece + i as f64 * (piece + spacing);
            let p = c + axis.scale(t);
            Hobb {
                center: Point3::new(p.x, p.y, door.center.z),
                length: piece,
                ..*door
            }
        })
        .collect())
}

/// Box around a door cluster in the frame of its wall.
fn cluster_box(points: &[Point3], wall: &Hobb) -> Hobb {
    let mut t = (f64::INFINITY, f64::NEG_INFINITY);
    let mut n = (f64::INFINITY, f64::NEG_INFINITY);
    let mut z = (f64::INFINITY, f64::NEG_INFINITY);
    for p in points {
        let (a, b) = wall.local_xy(p.xy());
        t = (t.0.min(a), t.1.max(a));
        n = (n.0.min(b), n.1.max(b));
        z = (z.0.min(p.z), z.1.max(p.z));
    }
    let c = wall.center_xy() + wall.axis().scale(0.5 * (t.0 + t.1)) + wall.normal().scale(0.5 * (n.0 + n.1));
    Hobb {
        center: Point3::new(c.x, c.y, 0.5 * (z.0 + z.1)),
        length: t.1 - t.0,
        width: n.1 - n.0,
        height: z.1 - z.0,
        yaw: wall.yaw,
    }
}

/// Full door stage for one storey. Returned doors carry id 0.
pub fn reconstruct_doors(door_points: &[Point3], walls: &[WallInstance], params: &DoorParams) -> Result<Vec<DoorInstance>> {
    let candidates = find_door_candidates(door_points, walls, params.wall_margin);
    let clusters = expand_door_cluster(door_points, &candidates, params.cluster_eps, params.expansion_radius);
    let mut doors = Vec::new();
    for cluster in clusters {
        if cluster.point_indices.len() < params.min_points {
            continue;
        }
        let Some(wall) = walls.iter().find(|w| w.id == cluster.wall) else { continue };
        let pts: Vec<Point3> = cluster.point_indices.iter().map(|&i| door_points[i]).collect();
        let projected = project_into_wall(&cluster_box(&pts, &wall.hobb), wall);
        if !(projected.length > 0.0 && projected.height > 0.0) {
            continue;
        }
        for hobb in split_oversized(&projected, params.max_width, params.split_spacing)? {
            doors.push(DoorInstance {
                id: ElementId(0),
                parent_wall_id: wall.id,
                hobb,
            });
        }
    }
    Ok(doors)
}

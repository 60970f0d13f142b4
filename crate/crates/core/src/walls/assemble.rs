//! Turning extracted wall surfaces into wall solids.

use std::f64::consts::PI;

use crate::geom::{angle_diff, min_area_hobb, Hobb, Plane, Point2, Point3};
use crate::model::{ElementId, WallInstance};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AssemblyParams {
    /// Planes whose normals differ by less than this (radians) may pair.
    pub parallel_angle: f64,
    pub max_thickness: f64,
    /// Thickness given to walls seen from one side only.
    pub default_thickness: f64,
    /// Boxes within this yaw (radians) of the wall axis are snapped onto it.
    pub snap_tolerance: f64,
}

impl Default for AssemblyParams {
    fn default() -> Self {
        Self {
            parallel_angle: 10f64.to_radians(),
            max_thickness: 0.5,
            default_thickness: 0.2,
            snap_tolerance: 10f64.to_radians(),
        }
    }
}

const MAX_FACE_TILT: f64 = 0.342; // sin 20°
const SIDE_PROBE: f64 = 0.5;

#[derive(Debug, Clone)]
struct Face {
    plane: usize,
    across: f64,
    along: (f64, f64),
}

/// Pairs parallel planes into two-sided walls and boxes every wall.
///
/// Planes closer than `max_thickness` across the wall, parallel within
/// `parallel_angle` and overlapping along the wall are paired greedily by
/// ascending gap. A pair spans the two faces; an unpaired face gets the default
/// thickness, placed on the side of the face with fewer `context` points.
/// Wall ids are left at zero for the caller to assign.
pub fn assemble_wall_instances(
    planes: &[Plane],
    cluster_points: &[Point3],
    context: &[Point3],
    axis_dir: Point2,
    params: &AssemblyParams,
    storey: usize,
) -> Vec<WallInstance> {
    let across_dir = Point2::new(-axis_dir.y, axis_dir.x);
    let faces: Vec<Face> = planes
        .iter()
        .enumerate()
        .filter(|(_, p)| p.normal[2].abs() <= MAX_FACE_TILT && !p.inlier_indices.is_empty())
        .map(|(i, p)| {
            let mut sum = 0.0;
            let mut along = (f64::INFINITY, f64::NEG_INFINITY);
            for &k in &p.inlier_indices {
                let q = cluster_points[k].xy();
                sum += q.dot(&across_dir);
                let a = q.dot(&axis_dir);
                along = (along.0.min(a), along.1.max(a));
            }
            Face {
                plane: i,
                across: sum / p.inlier_indices.len() as f64,
                along,
            }
        })
        .collect();

    let mut candidates = Vec::new();
    for i in 0..faces.len() {
        for j in i + 1..faces.len() {
            let (a, b) = (&faces[i], &faces[j]);
            let gap = (a.across - b.across).abs();
            let overlap = a.along.1.min(b.along.1) - a.along.0.max(b.along.0);
            if gap <= params.max_thickness
                && overlap > 0.0
                && planes[a.plane].angle_to(&planes[b.plane]) < params.parallel_angle
            {
                candidates.push((gap, i, j));
            }
        }
    }
    candidates.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)).then(x.2.cmp(&y.2)));

    let mut used = vec![false; faces.len()];
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for (_, i, j) in candidates {
        if !used[i] && !used[j] {
            used[i] = true;
            used[j] = true;
            groups.push(vec![i, j]);
        }
    }
    for (i, u) in used.iter().enumerate() {
        if !u {
            groups.push(vec![i]);
        }
    }
    groups.sort_by_key(|g| g.iter().map(|&f| faces[f].plane).min());

    groups
        .into_iter()
        .filter_map(|group| {
            let members: Vec<&Face> = group.iter().map(|&f| &faces[f]).collect();
            let pts: Vec<Point3> = members
                .iter()
                .flat_map(|f| planes[f.plane].inlier_indices.iter().map(|&k| cluster_points[k]))
                .collect();
            let hobb = wall_box(&pts, &members, context, axis_dir, params)?;
            let source_planes = members
                .iter()
                .map(|f| Plane {
                    inlier_indices: Vec::new(),
                    ..planes[f.plane].clone()
                })
                .collect();
            Some(WallInstance {
                id: ElementId(0),
                storey,
                hobb,
                source_planes,
            })
        })
        .collect()
}

fn wall_box(pts: &[Point3], faces: &[&Face], context: &[Point3], axis_dir: Point2, params: &AssemblyParams) -> Option<Hobb> {
    let fitted = min_area_hobb(pts).ok()?;
    let axis_yaw = axis_dir.y.atan2(axis_dir.x);
    let across_dir = Point2::new(-axis_dir.y, axis_dir.x);

    if angle_diff(fitted.yaw, axis_yaw, PI) > params.snap_tolerance {
        let mut b = fitted;
        b.width = b.width.min(params.max_thickness);
        return Some(b);
    }

    // Manhattan snap: re-measure the extents in the wall-axis frame.
    let (mut a0, mut a1) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut z0, mut z1) = (f64::INFINITY, f64::NEG_INFINITY);
    for p in pts {
        let a = p.xy().dot(&axis_dir);
        a0 = a0.min(a);
        a1 = a1.max(a);
        z0 = z0.min(p.z);
        z1 = z1.max(p.z);
    }
    let (across, width) = match faces {
        [a, b] => (0.5 * (a.across + b.across), (a.across - b.across).abs()),
        [f] => {
            let side = body_side(f, context, axis_dir, across_dir, (z0, z1));
            (f.across + side * 0.5 * params.default_thickness, params.default_thickness)
        }
        _ => return None,
    };
    if !(width > 0.0) || !(a1 > a0) {
        return None;
    }
    let along = 0.5 * (a0 + a1);
    let c = axis_dir.scale(along) + across_dir.scale(across);
    Some(Hobb::new(
        Point3::new(c.x, c.y, 0.5 * (z0 + z1)),
        a1 - a0,
        width,
        z1 - z0,
        axis_yaw,
    ))
}

/// `+1` or `-1` along `across_dir`: the side of the face with fewer context points.
fn body_side(face: &Face, context: &[Point3], axis_dir: Point2, across_dir: Point2, z: (f64, f64)) -> f64 {
    let margin = 0.05;
    let (mut plus, mut minus) = (0usize, 0usize);
    for p in context {
        if p.z < z.0 || p.z > z.1 {
            continue;
        }
        let q = p.xy();
        let a = q.dot(&axis_dir);
        if a < face.along.0 || a > face.along.1 {
            continue;
        }
        let d = q.dot(&across_dir) - face.across;
        if d > margin && d <= SIDE_PROBE {
            plus += 1;
        } else if d < -margin && d >= -SIDE_PROBE {
            minus += 1;
        }
    }
    if minus < plus {
        -1.0
    } else {
        1.0
    }
}

//! Wall topology refinement: corner closure, collinear merging and removal of
//! enclosed fragments, iterated to a fixpoint.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{angle_diff, Hobb, Point2, Point3};
use crate::model::WallInstance;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TopologyConfig {
    /// Endpoint search radius around centreline intersections, meters.
    pub intersection_radius: f64,
    pub merge_distance: f64,
    /// Radians.
    pub collinear_angle_tol: f64,
    pub collinear_lateral_tol: f64,
    /// Allowed deviation from 90° for a perpendicular pair, radians.
    pub perpendicular_tol: f64,
    pub max_iterations: usize,
}

impl Default for TopologyConfig {
    fn default() -> Self {
        Self {
            intersection_radius: 0.3,
            merge_distance: 0.15,
            collinear_angle_tol: 5f64.to_radians(),
            collinear_lateral_tol: 0.05,
            perpendicular_tol: 10f64.to_radians(),
            max_iterations: 10,
        }
    }
}

impl TopologyConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            self.intersection_radius,
            self.merge_distance,
            self.collinear_angle_tol,
            self.collinear_lateral_tol,
            self.perpendicular_tol,
        ];
        if positive.iter().any(|v| !(*v > 0.0)) || self.max_iterations == 0 {
            return Err(Error::InvalidConfig(
                "topology thresholds must be positive and max_iterations at least 1".into(),
            ));
        }
        Ok(())
    }
}

/// Moves below this are treated as no change, which keeps the operators
/// idempotent in floating point.
const MOVE_EPS: f64 = 1e-9;
const CONTAIN_TOL: f64 = 1e-3;

fn line_intersection(a: &Hobb, b: &Hobb) -> Option<Point2> {
    let (u, v) = (a.axis(), b.axis());
    let denom = u.cross(&v);
    if denom.abs() < 1e-12 {
        return None;
    }
    let t = (b.center_xy() - a.center_xy()).cross(&v) / denom;
    Some(a.center_xy() + u.scale(t))
}

fn distance_to_baseline(p: Point2, b: &Hobb) -> f64 {
    let (t, n) = b.local_xy(p);
    let excess = (t.abs() - 0.5 * b.length).max(0.0);
    excess.hypot(n)
}

fn is_perpendicular(a: &Hobb, b: &Hobb, tol: f64) -> bool {
    (angle_diff(a.yaw, b.yaw, PI) - FRAC_PI_2).abs() <= tol
}

/// Closes corners between perpendicular walls.
///
/// For every perpendicular pair whose centrelines cross within
/// `intersection_radius` of the other wall's baseline, the wall endpoint
/// nearer the crossing is moved along its centreline to the crossing plus
/// half the other wall's width, if it lies within `intersection_radius` of the
/// crossing. All moves are computed from the input set.
pub fn correct_intersections(walls: &[WallInstance], cfg: &TopologyConfig) -> Vec<WallInstance> {
    let r = cfg.intersection_radius;
    walls
        .iter()
        .enumerate()
        .map(|(i, wall)| {
            let a = &wall.hobb;
            let half = 0.5 * a.length;
            // (distance to crossing, other id, new axial position)
            let mut start_move: Option<(f64, u32, f64)> = None;
            let mut end_move: Option<(f64, u32, f64)> = None;
            let (start, end) = a.baseline();
            for (j, other) in walls.iter().enumerate() {
                let b = &other.hobb;
                if i == j || !is_perpendicular(a, b, cfg.perpendicular_tol) {
                    continue;
                }
                let Some(x) = line_intersection(a, b) else { continue };
                if distance_to_baseline(x, b) > r {
                    continue;
                }
                let t = a.local_xy(x).0;
                let (ds, de) = (start.distance(&x), end.distance(&x));
                let key = other.id.0;
                if de < ds {
                    if de <= r && end_move.map_or(true, |m| (de, key) < (m.0, m.1)) {
                        end_move = Some((de, key, t + 0.5 * b.width));
                    }
                } else if ds <= r && start_move.map_or(true, |m| (ds, key) < (m.0, m.1)) {
                    start_move = Some((ds, key, t - 0.5 * b.width));
                }
            }
            let mut t0 = -half;
            let mut t1 = half;
            if let Some((_, _, t)) = start_move {
                if (t - t0).abs() > MOVE_EPS {
                    t0 = t;
                }
            }
            if let Some((_, _, t)) = end_move {
                if (t - t1).abs() > MOVE_EPS {
                    t1 = t;
                }
            }
            if (t0 == -half && t1 == half) || t1 - t0 <= MOVE_EPS {
                return wall.clone();
            }
            let c = a.center_xy() + a.axis().scale(0.5 * (t0 + t1));
            WallInstance {
                hobb: Hobb {
                    center: Point3::new(c.x, c.y, a.center.z),
                    length: t1 - t0,
                    ..*a
                },
                ..wall.clone()
            }
        })
        .collect()
}

/// Axial interval of `b`'s baseline on `a`'s axis and the lateral offset of
/// `b`'s centre from `a`'s centreline.
fn relative_extent(a: &Hobb, b: &Hobb) -> ((f64, f64), f64) {
    let (s, e) = b.baseline();
    let ts = a.local_xy(s).0;
    let te = a.local_xy(e).0;
    ((ts.min(te), ts.max(te)), a.local_xy(b.center_xy()).1.abs())
}

fn merge_gap(a: &Hobb, b: &Hobb, cfg: &TopologyConfig) -> Option<f64> {
    if angle_diff(a.yaw, b.yaw, PI) > cfg.collinear_angle_tol {
        return None;
    }
    let ((b0, b1), lateral_b) = relative_extent(a, b);
    let (_, lateral_a) = relative_extent(b, a);
    if lateral_a.max(lateral_b) > cfg.collinear_lateral_tol {
        return None;
    }
    let half = 0.5 * a.length;
    let gap = (b0 - half).max(-half - b1);
    (gap <= cfg.merge_distance).then_some(gap)
}

/// One wall spanning both inputs: the longer wall's line and yaw, averaged
/// height and base, the larger width, and the smaller id.
fn merge_pair(a: &WallInstance, b: &WallInstance) -> WallInstance {
    let (primary, secondary) = if (b.hobb.length, a.id) > (a.hobb.length, b.id) {
        (b, a)
    } else {
        (a, b)
    };
    let p = &primary.hobb;
    let ((s0, s1), _) = relative_extent(p, &secondary.hobb);
    let t0 = (-0.5 * p.length).min(s0);
    let t1 = (0.5 * p.length).max(s1);
    let c = p.center_xy() + p.axis().scale(0.5 * (t0 + t1));
    let height = 0.5 * (a.hobb.height + b.hobb.height);
    let base = 0.5 * (a.hobb.z_min() + b.hobb.z_min());
    let mut source_planes = a.source_planes.clone();
    source_planes.extend(b.source_planes.iter().cloned());
    WallInstance {
        id: a.id.min(b.id),
        storey: primary.storey,
        hobb: Hobb {
            center: Point3::new(c.x, c.y, base + 0.5 * height),
            length: t1 - t0,
            width: a.hobb.width.max(b.hobb.width),
            height,
            yaw: p.yaw,
        },
        source_planes,
    }
}

/// Merges collinear walls whose facing endpoints are within `merge_distance`
/// or whose baselines overlap, closest pairs first (ties by id), until no
/// candidate pair remains.
pub fn merge_collinear(walls: &[WallInstance], cfg: &TopologyConfig) -> Vec<WallInstance> {
    let mut out = walls.to_vec();
    loop {
        let mut best: Option<(f64, (u32, u32), usize, usize)> = None;
        for i in 0..out.len() {
            for j in i + 1..out.len() {
                let Some(gap) = merge_gap(&out[i].hobb, &out[j].hobb, cfg) else { continue };
                let ids = (out[i].id.0.min(out[j].id.0), out[i].id.0.max(out[j].id.0));
                let better = best.map_or(true, |(g, k, _, _)| gap.total_cmp(&g).then(ids.cmp(&k)).is_lt());
                if better {
                    best = Some((gap, ids, i, j));
                }
            }
        }
        let Some((_, _, i, j)) = best else { break };
        out[i] = merge_pair(&out[i], &out[j]);
        out.remove(j);
    }
    out
}

/// Drops walls whose eight corners all lie inside (within 1 mm) a larger
/// wall; of two identical walls the lower id survives.
pub fn remove_redundant(walls: &[WallInstance]) -> Vec<WallInstance> {
    walls
        .iter()
        .filter(|w| {
            let corners = w.hobb.corners();
            !walls.iter().any(|v| {
                if std::ptr::eq(*w, v) {
                    return false;
                }
                let (vw, vv) = (w.hobb.volume(), v.hobb.volume());
                let dominates = vv > vw || (vv == vw && v.id < w.id);
                dominates && corners.iter().all(|c| v.hobb.contains(c, CONTAIN_TOL))
            })
        })
        .cloned()
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct RefineOutcome {
    pub walls: Vec<WallInstance>,
    /// Passes run, including the final pass that changed nothing.
    pub iterations: usize,
    /// False when `max_iterations` ran out with changes still pending.
    pub converged: bool,
}

/// Repeats merge → intersection correction → redundancy removal until a pass
/// leaves the wall set unchanged or the iteration budget is spent.
pub fn refine_topology(walls: &[WallInstance], cfg: &TopologyConfig) -> RefineOutcome {
    let mut current = walls.to_vec();
    for iteration in 1..=cfg.max_iterations {
        let next = remove_redundant(&correct_intersections(&merge_collinear(&current, cfg), cfg));
        if next == current {
            return RefineOutcome {
                walls: current,
                iterations: iteration,
                converged: true,
            };
        }
        current = next;
    }
    RefineOutcome {
        walls: current,
        iterations: cfg.max_iterations,
        converged: false,
    }
}

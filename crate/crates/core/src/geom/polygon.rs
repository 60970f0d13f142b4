//! Planar convex polygons: hulls, simplification and clipping.

use super::point::{orient2d, Point2};
use crate::error::{Error, Result};

/// Convex hull of `points` as a counter-clockwise vertex list.
///
/// Collinear boundary points are dropped, so no three consecutive hull
/// vertices are collinear. The first vertex is the lexicographically smallest.
pub fn convex_hull_2d(points: &[Point2]) -> Result<Vec<Point2>> {
    let mut pts: Vec<Point2> = points.to_vec();
    pts.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    pts.dedup();
    if pts.len() < 3 {
        return Err(Error::DegenerateInput(format!(
            "convex hull needs at least 3 distinct points, got {}",
            pts.len()
        )));
    }

    let mut lower: Vec<Point2> = Vec::with_capacity(pts.len());
    for &p in &pts {
        while lower.len() >= 2 && orient2d(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0.0 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<Point2> = Vec::with_capacity(pts.len());
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && orient2d(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0.0 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);

    if lower.len() < 3 {
        return Err(Error::DegenerateInput(
            "points are collinear; hull is a segment".into(),
        ));
    }
    Ok(lower)
}

/// Signed area, positive for counter-clockwise polygons.
pub fn polygon_area(poly: &[Point2]) -> f64 {
    let n = poly.len();
    if n < 3 {
        return 0.0;
    }
    let mut acc = 0.0;
    for i in 0..n {
        acc += poly[i].cross(&poly[(i + 1) % n]);
    }
    0.5 * acc
}

/// Reduces a convex CCW polygon to at most four vertices.
///
/// Repeatedly collapses the edge whose removal adds the least area: the edge
/// `v[i] → v[i+1]` is replaced by the intersection of the supporting lines of
/// its two neighbouring edges. The result contains the input polygon.
/// Triangles and quadrilaterals are returned unchanged.
pub fn reduce_hull_to_quad(hull: &[Point2]) -> Vec<Point2> {
    let mut poly = hull.to_vec();
    while poly.len() > 4 {
        let n = poly.len();
        let mut best: Option<(f64, usize, Point2)> = None;
        for i in 0..n {
            let prev = poly[(i + n - 1) % n];
            let a = poly[i];
            let b = poly[(i + 1) % n];
            let next = poly[(i + 2) % n];
            let d_prev = a - prev;
            let d_next = next - b;
            let denom = d_prev.cross(&d_next);
            // Neighbouring edges must converge beyond the collapsed edge.
            if denom <= 0.0 {
                continue;
            }
            let t = (b - a).cross(&d_next) / denom;
            if !(t >= 0.0) || !t.is_finite() {
                continue;
            }
            let apex = a + d_prev.scale(t);
            let added = 0.5 * ((apex - a).cross(&(b - a))).abs();
            if best.map_or(true, |(area, _, _)| added < area) {
                best = Some((added, i, apex));
            }
        }
        let Some((_, i, apex)) = best else {
            // Unreachable for a convex polygon with five or more vertices.
            break;
        };
        poly[i] = apex;
        poly.remove((i + 1) % n);
    }
    poly
}

/// Clips convex `subject` against convex CCW `clip` (Sutherland–Hodgman).
pub fn clip_convex(subject: &[Point2], clip: &[Point2]) -> Vec<Point2> {
    let mut output = subject.to_vec();
    let m = clip.len();
    for i in 0..m {
        if output.is_empty() {
            break;
        }
        let a = clip[i];
        let b = clip[(i + 1) % m];
        let input = std::mem::take(&mut output);
        let k = input.len();
        for j in 0..k {
            let cur = input[j];
            let prev = input[(j + k - 1) % k];
            let cur_in = orient2d(a, b, cur) >= 0.0;
            let prev_in = orient2d(a, b, prev) >= 0.0;
            if cur_in {
                if !prev_in {
                    output.push(segment_line_intersection(prev, cur, a, b));
                }
                output.push(cur);
            } else if prev_in {
                output.push(segment_line_intersection(prev, cur, a, b));
            }
        }
    }
    output
}

fn segment_line_intersection(p: Point2, q: Point2, a: Point2, b: Point2) -> Point2 {
    let dp = orient2d(a, b, p);
    let dq = orient2d(a, b, q);
    let t = dp / (dp - dq);
    p + (q - p).scale(t)
}

/// Area of the intersection of two convex CCW polygons.
pub fn convex_intersection_area(a: &[Point2], b: &[Point2]) -> f64 {
    polygon_area(&clip_convex(a, b)).max(0.0)
}

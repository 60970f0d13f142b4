use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::point::{wrap_angle, Point2, Point3};
use super::polygon::{convex_hull_2d, reduce_hull_to_quad};
use crate::error::{Error, Result};

/// Horizontal oriented bounding box: a cuboid rotated about the vertical axis only.
///
/// `length` runs along the yaw direction, `width` across it. Corners are
/// generated bottom ring first, counter-clockwise from the `(-l/2, -w/2)` corner.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Hobb {
    pub center: Point3,
    pub length: f64,
    pub width: f64,
    pub height: f64,
    /// Radians in `[0, π)`.
    pub yaw: f64,
}

/// Axis-aligned bounds `(min, max)`.
pub type Aabb = (Point3, Point3);

impl Hobb {
    pub fn new(center: Point3, length: f64, width: f64, height: f64, yaw: f64) -> Self {
        Self {
            center,
            length,
            width,
            height,
            yaw: wrap_angle(yaw, PI),
        }
    }

    /// Box spanning the horizontal segment `start → end`, centred across it.
    pub fn from_baseline(start: Point2, end: Point2, width: f64, z_min: f64, height: f64) -> Self {
        let d = end - start;
        let mid = Point2::new(0.5 * (start.x + end.x), 0.5 * (start.y + end.y));
        Self::new(
            Point3::new(mid.x, mid.y, z_min + 0.5 * height),
            d.norm(),
            width,
            height,
            d.y.atan2(d.x),
        )
    }

    /// Unit vector along the length.
    pub fn axis(&self) -> Point2 {
        Point2::new(self.yaw.cos(), self.yaw.sin())
    }

    /// Unit vector across the width.
    pub fn normal(&self) -> Point2 {
        Point2::new(-self.yaw.sin(), self.yaw.cos())
    }

    pub fn center_xy(&self) -> Point2 {
        self.center.xy()
    }

    pub fn z_min(&self) -> f64 {
        self.center.z - 0.5 * self.height
    }

    pub fn z_max(&self) -> f64 {
        self.center.z + 0.5 * self.height
    }

    pub fn volume(&self) -> f64 {
        self.length * self.width * self.height
    }

    pub fn footprint_area(&self) -> f64 {
        self.length * self.width
    }

    /// Endpoints of the centreline, ordered along the axis.
    pub fn baseline(&self) -> (Point2, Point2) {
        let c = self.center_xy();
        let h = self.axis().scale(0.5 * self.length);
        (c - h, c + h)
    }

    /// Coordinates of `p` along the axis and across it, relative to the centre.
    pub fn local_xy(&self, p: Point2) -> (f64, f64) {
        let d = p - self.center_xy();
        (d.dot(&self.axis()), d.dot(&self.normal()))
    }

    /// Counter-clockwise footprint corners.
    pub fn footprint(&self) -> [Point2; 4] {
        let c = self.center_xy();
        let a = self.axis().scale(0.5 * self.length);
        let n = self.normal().scale(0.5 * self.width);
        [c - a - n, c + a - n, c + a + n, c - a + n]
    }

    pub fn corners(&self) -> [Point3; 8] {
        let f = self.footprint();
        let (z0, z1) = (self.z_min(), self.z_max());
        [
            Point3::new(f[0].x, f[0].y, z0),
            Point3::new(f[1].x, f[1].y, z0),
            Point3::new(f[2].x, f[2].y, z0),
            Point3::new(f[3].x, f[3].y, z0),
            Point3::new(f[0].x, f[0].y, z1),
            Point3::new(f[1].x, f[1].y, z1),
            Point3::new(f[2].x, f[2].y, z1),
            Point3::new(f[3].x, f[3].y, z1),
        ]
    }

    /// Inverse of [`Hobb::corners`].
    pub fn from_corners(c: &[Point3; 8]) -> Self {
        let sum = c.iter().fold(Point3::default(), |acc, p| acc + *p);
        let center = sum * 0.125;
        let e0 = c[1].xy() - c[0].xy();
        let e1 = c[2].xy() - c[1].xy();
        Self::new(center, e0.norm(), e1.norm(), c[4].z - c[0].z, e0.y.atan2(e0.x))
    }

    /// Containment with an absolute tolerance in meters.
    pub fn contains(&self, p: &Point3, tol: f64) -> bool {
        let (u, v) = self.local_xy(p.xy());
        u.abs() <= 0.5 * self.length + tol
            && v.abs() <= 0.5 * self.width + tol
            && (p.z - self.center.z).abs() <= 0.5 * self.height + tol
    }

    pub fn aabb(&self) -> Aabb {
        let f = self.footprint();
        let min_x = f.iter().map(|p| p.x).fold(f64::INFINITY, f64::min);
        let max_x = f.iter().map(|p| p.x).fold(f64::NEG_INFINITY, f64::max);
        let min_y = f.iter().map(|p| p.y).fold(f64::INFINITY, f64::min);
        let max_y = f.iter().map(|p| p.y).fold(f64::NEG_INFINITY, f64::max);
        (
            Point3::new(min_x, min_y, self.z_min()),
            Point3::new(max_x, max_y, self.z_max()),
        )
    }

    /// Swaps length and width if needed so that `length >= width`.
    pub fn canonical(self) -> Self {
        if self.width > self.length {
            Self::new(self.center, self.width, self.length, self.height, self.yaw + 0.5 * PI)
        } else {
            self
        }
    }
}

/// Vertical cylinder standing on `base_center`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cylinder {
    pub base_center: Point3,
    pub radius: f64,
    pub height: f64,
}

impl Cylinder {
    pub const AXIS: [f64; 3] = [0.0, 0.0, 1.0];

    pub fn volume(&self) -> f64 {
        PI * self.radius * self.radius * self.height
    }

    pub fn contains(&self, p: &Point3, tol: f64) -> bool {
        let dx = p.x - self.base_center.x;
        let dy = p.y - self.base_center.y;
        let r = self.radius + tol;
        dx * dx + dy * dy <= r * r
            && p.z >= self.base_center.z - tol
            && p.z <= self.base_center.z + self.height + tol
    }

    pub fn aabb(&self) -> Aabb {
        let c = self.base_center;
        (
            Point3::new(c.x - self.radius, c.y - self.radius, c.z),
            Point3::new(c.x + self.radius, c.y + self.radius, c.z + self.height),
        )
    }
}

/// Minimum-area horizontal box around `points`.
///
/// The XY hull is reduced to a quadrilateral (a triangle is kept as is) and
/// each of its edges is tried as the box direction; the box with the smallest
/// footprint over the full hull wins. Height spans the z-range of the input.
/// For square footprints the yaw is only defined modulo 90°.
pub fn min_area_hobb(points: &[Point3]) -> Result<Hobb> {
    if points.len() < 3 {
        return Err(Error::DegenerateInput(format!(
            "H-OBB fit needs at least 3 points, got {}",
            points.len()
        )));
    }
    let xy: Vec<Point2> = points.iter().map(Point3::xy).collect();
    let hull = convex_hull_2d(&xy).map_err(|_| {
        Error::DegenerateInput("point footprint is a line or a point".into())
    })?;
    let candidates = reduce_hull_to_quad(&hull);

    let mut best: Option<(f64, f64, [f64; 4])> = None;
    let k = candidates.len();
    for i in 0..k {
        let e = candidates[(i + 1) % k] - candidates[i];
        if e.norm() == 0.0 {
            continue;
        }
        let angle = e.y.atan2(e.x);
        let bounds = rotated_bounds(&hull, -angle);
        let area = (bounds[1] - bounds[0]) * (bounds[3] - bounds[2]);
        if best.map_or(true, |(a, _, _)| area < a) {
            best = Some((area, angle, bounds));
        }
    }
    let (_, angle, [min_u, max_u, min_v, max_v]) =
        best.ok_or_else(|| Error::DegenerateInput("no candidate edge".into()))?;

    let center_xy = Point2::new(0.5 * (min_u + max_u), 0.5 * (min_v + max_v)).rotate(angle);
    let (z_min, z_max) = points
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| (lo.min(p.z), hi.max(p.z)));

    let hobb = Hobb::new(
        Point3::new(center_xy.x, center_xy.y, 0.5 * (z_min + z_max)),
        max_u - min_u,
        max_v - min_v,
        z_max - z_min,
        angle,
    );
    Ok(hobb.canonical())
}

/// Tightest box around `points` with its length axis at `yaw`.
pub fn hobb_with_yaw(points: &[Point3], yaw: f64) -> Result<Hobb> {
    if points.is_empty() {
        return Err(Error::DegenerateInput("no points to box".into()));
    }
    let xy: Vec<Point2> = points.iter().map(Point3::xy).collect();
    let [min_u, max_u, min_v, max_v] = rotated_bounds(&xy, -yaw);
    let c = Point2::new(0.5 * (min_u + max_u), 0.5 * (min_v + max_v)).rotate(yaw);
    let (z_min, z_max) = points
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| (lo.min(p.z), hi.max(p.z)));
    Ok(Hobb::new(
        Point3::new(c.x, c.y, 0.5 * (z_min + z_max)),
        max_u - min_u,
        max_v - min_v,
        z_max - z_min,
        yaw,
    ))
}

/// `[min_u, max_u, min_v, max_v]` of the points after rotating by `angle`.
pub(crate) fn rotated_bounds(points: &[Point2], angle: f64) -> [f64; 4] {
    let (s, c) = angle.sin_cos();
    let mut b = [f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY];
    for p in points {
        let u = c * p.x - s * p.y;
        let v = s * p.x + c * p.y;
        b[0] = b[0].min(u);
        b[1] = b[1].max(u);
        b[2] = b[2].min(v);
        b[3] = b[3].max(v);
    }
    b
}

#[cfg(test)]
mod tests {
    use super::*;

    fn box_samples(l: f64, w: f64, h: f64) -> Vec<Point3> {
        let mut pts = Vec::new();
        for i in 0..=20 {
            for j in 0..=4 {
                for k in 0..=5 {
                    pts.push(Point3::new(
                        -0.5 * l + l * i as f64 / 20.0,
                        -0.5 * w + w * j as f64 / 4.0,
                        h * k as f64 / 5.0,
                    ));
                }
            }
        }
        pts
    }

    #[test]
    fn axis_aligned_box() {
        let b = min_area_hobb(&box_samples(4.0, 0.2, 2.5)).unwrap();
        assert!(b.yaw.abs() < 1e-9 || (PI - b.yaw) < 1e-9);
        assert!((b.length - 4.0).abs() < 1e-6);
        assert!((b.width - 0.2).abs() < 1e-6);
        assert!((b.height - 2.5).abs() < 1e-6);
    }

    #[test]
    fn rotated_box_recovers_yaw() {
        let theta = 30f64.to_radians();
        let pts: Vec<Point3> = box_samples(4.0, 0.2, 2.5).iter().map(|p| p.rotate_z(theta)).collect();
        let b = min_area_hobb(&pts).unwrap();
        assert!((b.yaw - theta).abs() < 0.1f64.to_radians());
        assert!((b.length - 4.0).abs() < 1e-6);
        assert!((b.width - 0.2).abs() < 1e-6);
    }

    #[test]
    fn vertical_line_is_degenerate() {
        let pts: Vec<Point3> = (0..10).map(|i| Point3::new(1.0, 1.0, i as f64)).collect();
        assert!(matches!(min_area_hobb(&pts), Err(Error::DegenerateInput(_))));
        assert!(min_area_hobb(&pts[..2]).is_err());
    }

    #[test]
    fn corner_round_trip() {
        let b = Hobb::new(Point3::new(1.0, -2.0, 1.5), 3.0, 0.25, 2.7, 1.1);
        let r = Hobb::from_corners(&b.corners());
        assert!((r.center.distance(&b.center)) < 1e-9);
        assert!((r.length - b.length).abs() < 1e-9);
        assert!((r.width - b.width).abs() < 1e-9);
        assert!((r.height - b.height).abs() < 1e-9);
        assert!((r.yaw - b.yaw).abs() < 1e-9);
    }

    #[test]
    fn containment_and_baseline() {
        let b = Hobb::from_baseline(Point2::new(0.0, 0.0), Point2::new(0.0, 4.0), 0.2, 0.0, 3.0);
        assert!((b.yaw - 0.5 * PI).abs() < 1e-12);
        assert!(b.contains(&Point3::new(0.05, 3.9, 2.9), 0.0));
        assert!(!b.contains(&Point3::new(0.15, 3.9, 2.9), 0.0));
        assert!(b.contains(&Point3::new(0.1005, 3.9, 2.9), 0.001));
        let (s, e) = b.baseline();
        assert!(s.distance(&Point2::new(0.0, 0.0)) < 1e-12);
        assert!(e.distance(&Point2::new(0.0, 4.0)) < 1e-12);
    }
}

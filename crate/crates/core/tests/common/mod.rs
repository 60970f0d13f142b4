#![allow(dead_code)]

use bimrecon::geom::angle_diff;
use bimrecon::{Plane, Point2, Point3};
use rand::Rng;
use rand_distr::{Distribution, Normal};

/// A wall seen from both sides: two parallel vertical faces.
pub struct TwoFaceWall {
    pub points: Vec<Point3>,
    /// Unit horizontal normal shared by both faces.
    pub normal: Point2,
    /// Signed offsets of the two faces along `normal`.
    pub offsets: [f64; 2],
}

impl TwoFaceWall {
    /// Samples `per_face` points on each face of a `length × height` wall
    /// whose faces are `gap` apart, rotated by `yaw`, with Gaussian noise
    /// `sigma` along the normal.
    pub fn sample<R: Rng>(rng: &mut R, length: f64, height: f64, gap: f64, yaw: f64, sigma: f64, per_face: usize) -> Self {
        let axis = Point2::new(yaw.cos(), yaw.sin());
        let normal = Point2::new(-yaw.sin(), yaw.cos());
        let shift = Point2::new(rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0));
        let base = shift.dot(&normal);
        let offsets = [base - 0.5 * gap, base + 0.5 * gap];
        let noise = Normal::new(0.0, sigma.max(1e-300)).unwrap();
        let mut points = Vec::with_capacity(2 * per_face);
        for &off in &offsets {
            for _ in 0..per_face {
                let t = rng.random_range(-0.5 * length..0.5 * length);
                let z = rng.random_range(0.0..height);
                let e = if sigma > 0.0 { noise.sample(rng) } else { 0.0 };
                let along = shift.dot(&axis) + t;
                let p = axis.scale(along) + normal.scale(off + e);
                points.push(Point3::new(p.x, p.y, z));
            }
        }
        Self { points, normal, offsets }
    }

    /// Normal error in degrees and offset error in meters of `plane` against
    /// face `i`, with the plane's orientation aligned to the wall normal.
    pub fn face_error(&self, plane: &Plane, i: usize) -> (f64, f64) {
        let (n, d) = aligned(plane, self.normal);
        let angle = n.dot(&self.normal).clamp(-1.0, 1.0).acos().to_degrees();
        let tilt = plane.normal[2].abs().asin().to_degrees();
        (angle.max(tilt), (d - self.offsets[i]).abs())
    }

    /// Whether `planes` are exactly the two faces within the tolerances.
    pub fn recovered(&self, planes: &[Plane], max_angle_deg: f64, max_offset: f64) -> bool {
        if planes.len() != 2 {
            return false;
        }
        let ok = |p: &Plane, i: usize| {
            let (a, d) = self.face_error(p, i);
            a < max_angle_deg && d < max_offset
        };
        (ok(&planes[0], 0) && ok(&planes[1], 1)) || (ok(&planes[0], 1) && ok(&planes[1], 0))
    }

    /// Signed position along the wall normal where `plane` crosses the line
    /// through the wall centroid.
    pub fn offset_of(&self, plane: &Plane) -> f64 {
        let n = self.points.len().max(1) as f64;
        let c = self.points.iter().fold([0.0; 3], |a, p| [a[0] + p.x, a[1] + p.y, a[2] + p.z]).map(|v| v / n);
        let nn = [self.normal.x, self.normal.y, 0.0];
        let dot = |a: [f64; 3], b: [f64; 3]| a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
        let s = -(dot(plane.normal, c) + plane.offset) / dot(plane.normal, nn);
        dot(c, nn) + s
    }
}

fn aligned(plane: &Plane, reference: Point2) -> (Point2, f64) {
    let n = Point2::new(plane.normal[0], plane.normal[1]);
    let len = n.norm().max(1e-12);
    let (n, d) = (n.scale(1.0 / len), -plane.offset / len);
    if n.dot(&reference) < 0.0 {
        (n.scale(-1.0), -d)
    } else {
        (n, d)
    }
}

/// Smallest difference between two yaw angles, modulo π, in degrees.
pub fn yaw_error_deg(a: f64, b: f64) -> f64 {
    angle_diff(a, b, std::f64::consts::PI).abs().to_degrees()
}

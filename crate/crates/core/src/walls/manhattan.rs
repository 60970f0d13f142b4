//! Dominant horizontal orientation and per-axis splitting of wall points.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{angle_diff, estimate_normals, wrap_angle, Point2, Point3};

/// Direction a wall runs in, within the Manhattan frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum WallAxis {
    X,
    Y,
}

impl WallAxis {
    /// Yaw of the wall direction for a frame rotated by `frame_angle`.
    pub fn yaw(self, frame_angle: f64) -> f64 {
        match self {
            WallAxis::X => wrap_angle(frame_angle, PI),
            WallAxis::Y => wrap_angle(frame_angle + FRAC_PI_2, PI),
        }
    }

    pub fn direction(self, frame_angle: f64) -> Point2 {
        let a = self.yaw(frame_angle);
        Point2::new(a.cos(), a.sin())
    }

    /// Horizontal unit vector orthogonal to the wall surfaces.
    pub fn perpendicular(self, frame_angle: f64) -> Point2 {
        let a = self.yaw(frame_angle);
        Point2::new(-a.sin(), a.cos())
    }
}

const HIST_BINS: usize = 90;
const REFINE_WINDOW: f64 = 3.0 * PI / 180.0;
const MIN_POINTS: usize = 100;

/// Dominant wall orientation in `[0, π/2)` from per-point normals.
///
/// Horizontal normal angles are folded modulo 90° into a 1° histogram; the
/// peak must reach twice the mean bin count. The estimate is the 90°-periodic
/// circular mean of the angles within 3° of the peak.
pub fn manhattan_angle_from_normals(normals: &[[f64; 3]], vertical_tol: f64) -> Result<f64> {
    let folded: Vec<f64> = normals
        .iter()
        .filter(|n| n[2].abs() < vertical_tol.cos())
        .map(|n| wrap_angle(n[1].atan2(n[0]), FRAC_PI_2))
        .collect();
    if folded.len() < MIN_POINTS {
        return Err(Error::DegenerateInput(format!(
            "Manhattan frame needs at least {MIN_POINTS} points with horizontal normals, got {}",
            folded.len()
        )));
    }
    let bin_width = FRAC_PI_2 / HIST_BINS as f64;
    let mut hist = [0usize; HIST_BINS];
    for &a in &folded {
        hist[((a / bin_width) as usize).min(HIST_BINS - 1)] += 1;
    }
    let (peak, &peak_count) = hist
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(&a.0)))
        .unwrap_or((0, &0));
    let mean = folded.len() as f64 / HIST_BINS as f64;
    if (peak_count as f64) < 2.0 * mean {
        return Err(Error::DegenerateInput(
            "wall normals show no dominant horizontal direction".into(),
        ));
    }
    let peak_angle = (peak as f64 + 0.5) * bin_width;
    let (mut s, mut c) = (0.0, 0.0);
    for &a in &folded {
        if angle_diff(a, peak_angle, FRAC_PI_2) <= REFINE_WINDOW {
            s += (4.0 * a).sin();
            c += (4.0 * a).cos();
        }
    }
    Ok(wrap_angle(s.atan2(c) / 4.0, FRAC_PI_2))
}

/// Estimates normals with `k` neighbours, then the Manhattan angle.
pub fn estimate_manhattan_frame(wall_points: &[Point3], k: usize, vertical_tol: f64) -> Result<f64> {
    if wall_points.len() < MIN_POINTS {
        return Err(Error::DegenerateInput(format!(
            "Manhattan frame needs at least {MIN_POINTS} wall points, got {}",
            wall_points.len()
        )));
    }
    manhattan_angle_from_normals(&estimate_normals(wall_points, k), vertical_tol)
}

/// Splits point indices by the wall direction their normal implies.
///
/// Returns `(x_running, y_running)`. Points whose normal lies within
/// `vertical_tol` of the vertical belong to horizontal surfaces and are dropped.
pub fn split_by_direction(normals: &[[f64; 3]], frame_angle: f64, vertical_tol: f64) -> (Vec<usize>, Vec<usize>) {
    let mut x_running = Vec::new();
    let mut y_running = Vec::new();
    for (i, n) in normals.iter().enumerate() {
        if n[2].abs() >= vertical_tol.cos() {
            continue;
        }
        let phi = wrap_angle(n[1].atan2(n[0]) - frame_angle, PI);
        // A normal along the frame X axis belongs to a wall running along Y.
        if angle_diff(phi, 0.0, PI) <= angle_diff(phi, FRAC_PI_2, PI) {
            y_running.push(i);
        } else {
            x_running.push(i);
        }
    }
    (x_running, y_running)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn axis_vectors() {
        let f = 0.3;
        let d = WallAxis::X.direction(f);
        let p = WallAxis::X.perpendicular(f);
        assert!(d.dot(&p).abs() < 1e-12);
        assert!((WallAxis::Y.yaw(f) - (f + FRAC_PI_2)).abs() < 1e-12);
    }

    #[test]
    fn vertical_normals_are_discarded() {
        let normals = vec![[0.0, 0.0, 1.0]; 50];
        let (x, y) = split_by_direction(&normals, 0.0, 20f64.to_radians());
        assert!(x.is_empty() && y.is_empty());
    }

    #[test]
    fn isotropic_normals_are_degenerate() {
        let normals: Vec<[f64; 3]> = (0..900)
            .map(|i| {
                let a = i as f64 * 0.1f64.to_radians();
                [a.cos(), a.sin(), 0.0]
            })
            .collect();
        assert!(matches!(
            manhattan_angle_from_normals(&normals, 20f64.to_radians()),
            Err(Error::DegenerateInput(_))
        ));
    }
}

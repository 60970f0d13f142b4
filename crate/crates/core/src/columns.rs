//! Column reconstruction: clustering, round/rectangular classification from
//! curvature statistics, cylinder RANSAC and box fitting.

use std::f64::consts::FRAC_PI_2;

use nalgebra::{Matrix3, Vector3};
use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::cloud::SemanticClass;
use crate::error::{Error, Result};
use crate::geom::{angle_diff, dbscan, hobb_with_yaw, local_curvature, min_area_hobb, Cluster, Cylinder, Hobb, Point2, Point3};
use crate::model::ColumnShape;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ColumnParams {
    pub eps: f64,
    pub min_pts: usize,
    pub min_cluster_points: usize,
    pub curvature_k: usize,
    /// Clusters whose curvature σ/μ falls below this are round.
    pub cv_threshold: f64,
    pub ransac_threshold: f64,
    pub ransac_iterations: usize,
    pub max_radius: f64,
    /// Rectangular columns within this yaw (radians) of the building axes are
    /// snapped onto them.
    pub snap_tolerance: f64,
}

impl Default for ColumnParams {
    fn default() -> Self {
        Self {
            eps: 0.2,
            min_pts: 5,
            min_cluster_points: 100,
            curvature_k: 40,
            cv_threshold: 0.5,
            ransac_threshold: 0.01,
            ransac_iterations: 500,
            max_radius: 2.0,
            snap_tolerance: 10f64.to_radians(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColumnKind {
    Round,
    Rectangular,
}

/// DBSCAN over column points, dropping clusters smaller than `min_cluster_points`.
pub fn cluster_columns(points: &[Point3], eps: f64, min_pts: usize, min_cluster_points: usize) -> Vec<Cluster> {
    dbscan(points, eps, min_pts, SemanticClass::Column)
        .into_iter()
        .filter(|c| c.len() >= min_cluster_points)
        .collect()
}

/// Sample mean and standard deviation of the per-point curvature.
pub fn curvature_stats(points: &[Point3], k: usize) -> (f64, f64) {
    let c = local_curvature(points, k);
    if c.is_empty() {
        return (0.0, 0.0);
    }
    let n = c.len() as f64;
    let mean = c.iter().sum::<f64>() / n;
    let var = c.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Round when the curvature coefficient of variation is below the threshold.
/// A cluster with zero mean curvature is flat and counts as rectangular.
pub fn classify_shape(points: &[Point3], k: usize, cv_threshold: f64) -> ColumnKind {
    let (mean, std) = curvature_stats(points, k);
    if !(mean > 1e-12) {
        return ColumnKind::Rectangular;
    }
    if std / mean < cv_threshold {
        ColumnKind::Round
    } else {
        ColumnKind::Rectangular
    }
}

/// Circle through three points, `None` if they are (nearly) collinear.
fn circumcircle(a: Point2, b: Point2, c: Point2) -> Option<(Point2, f64)> {
    let d = 2.0 * (a.x * (b.y - c.y) + b.x * (c.y - a.y) + c.x * (a.y - b.y));
    if d.abs() < 1e-12 {
        return None;
    }
    let (a2, b2, c2) = (a.dot(&a), b.dot(&b), c.dot(&c));
    let ux = (a2 * (b.y - c.y) + b2 * (c.y - a.y) + c2 * (a.y - b.y)) / d;
    let uy = (a2 * (c.x - b.x) + b2 * (a.x - c.x) + c2 * (b.x - a.x)) / d;
    let center = Point2::new(ux, uy);
    Some((center, center.distance(&a)))
}

/// RMS of the radial residuals.
pub fn circle_rms(points: &[Point2], center: Point2, radius: f64) -> f64 {
    if points.is_empty() {
        return 0.0;
    }
    let ss: f64 = points.iter().map(|p| (p.distance(&center) - radius).powi(2)).sum();
    (ss / points.len() as f64).sqrt()
}

/// Algebraic least-squares circle.
fn kasa_fit(points: &[Point2]) -> Option<(Point2, f64)> {
    let mut ata = Matrix3::zeros();
    let mut atb = Vector3::zeros();
    for p in points {
        let row = Vector3::new(p.x, p.y, 1.0);
        let rhs = -(p.x * p.x + p.y * p.y);
        ata += row * row.transpose();
        atb += row * rhs;
    }
    let sol = ata.lu().solve(&atb)?;
    let center = Point2::new(-0.5 * sol[0], -0.5 * sol[1]);
    let r2 = center.dot(&center) - sol[2];
    (r2 > 0.0).then(|| (center, r2.sqrt()))
}

/// Geometric least-squares circle by Gauss-Newton from `start`; a step is
/// taken only if it lowers the RMS residual.
fn refine_circle(points: &[Point2], start: (Point2, f64)) -> (Point2, f64) {
    let (mut c, mut r) = start;
    let mut rms = circle_rms(points, c, r);
    for _ in 0..20 {
        let mut jtj = Matrix3::zeros();
        let mut jtr = Vector3::zeros();
        for p in points {
            let d = p.distance(&c);
            if d < 1e-12 {
                continue;
            }
            let j = Vector3::new(-(p.x - c.x) / d, -(p.y - c.y) / d, -1.0);
            jtj += j * j.transpose();
            jtr += j * (d - r);
        }
        let Some(step) = jtj.lu().solve(&(-jtr)) else { break };
        let nc = Point2::new(c.x + step[0], c.y + step[1]);
        let nr = r + step[2];
        let nrms = circle_rms(points, nc, nr);
        if !(nr > 0.0) || !(nrms < rms) {
            break;
        }
        let done = rms - nrms < 1e-15;
        c = nc;
        r = nr;
        rms = nrms;
        if done {
            break;
        }
    }
    (c, r)
}

/// Vertical cylinder by RANSAC over circles through three XY samples.
///
/// Circles wider than `max_radius` are rejected. The best model is refit on
/// its inliers (algebraic start, geometric refinement) and the refit is kept
/// only when it does not raise the inlier RMS. Height spans the inliers.
pub fn fit_cylinder_ransac<R: Rng + ?Sized>(
    points: &[Point3],
    distance_threshold: f64,
    iterations: usize,
    max_radius: f64,
    rng: &mut R,
) -> Result<Cylinder> {
    if points.len() < 3 {
        return Err(Error::DegenerateInput(format!(
            "cylinder fit needs at least 3 points, got {}",
            points.len()
        )));
    }
    let xy: Vec<Point2> = points.iter().map(Point3::xy).collect();
    let count = |c: Point2, r: f64| xy.iter().filter(|p| (p.distance(&c) - r).abs() <= distance_threshold).count();

    let mut best: Option<(usize, Point2, f64)> = None;
    for _ in 0..iterations {
        let idx = sample(rng, xy.len(), 3);
        let Some((c, r)) = circumcircle(xy[idx.index(0)], xy[idx.index(1)], xy[idx.index(2)]) else { continue };
        if r > max_radius {
            continue;
        }
        let n = count(c, r);
        if best.map_or(true, |(m, _, _)| n > m) {
            best = Some((n, c, r));
        }
    }
    let (n, c, r) = best.unwrap_or((0, Point2::default(), 0.0));
    let ratio = n as f64 / points.len() as f64;
    if ratio < 0.5 {
        return Err(Error::FitFailed { inlier_ratio: ratio });
    }

    let inliers: Vec<usize> = (0..xy.len())
        .filter(|&i| (xy[i].distance(&c) - r).abs() <= distance_threshold)
        .collect();
    let inlier_xy: Vec<Point2> = inliers.iter().map(|&i| xy[i]).collect();
    let before = circle_rms(&inlier_xy, c, r);
    let start = kasa_fit(&inlier_xy).unwrap_or((c, r));
    let start = if circle_rms(&inlier_xy, start.0, start.1) <= before { start } else { (c, r) };
    let (fc, fr) = refine_circle(&inlier_xy, start);
    let (fc, fr) = if circle_rms(&inlier_xy, fc, fr) <= before && fr > 0.0 && fr <= max_radius {
        (fc, fr)
    } else {
        (c, r)
    };

    let (z0, z1) = inliers
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &i| (lo.min(points[i].z), hi.max(points[i].z)));
    if !(z1 > z0) {
        return Err(Error::DegenerateInput("cylinder inliers have no vertical extent".into()));
    }
    Ok(Cylinder {
        base_center: Point3::new(fc.x, fc.y, z0),
        radius: fr,
        height: z1 - z0,
    })
}

pub fn fit_rect_column(points: &[Point3]) -> Result<Hobb> {
    min_area_hobb(points)
}

/// Re-boxes `hobb` on the nearest building axis when it lies within
/// `tolerance` of one.
fn snap_to_frame(points: &[Point3], hobb: Hobb, frame_angle: f64, tolerance: f64) -> Hobb {
    for axis in [frame_angle, frame_angle + FRAC_PI_2] {
        if angle_diff(hobb.yaw, axis, std::f64::consts::PI) <= tolerance {
            return hobb_with_yaw(points, axis).map(Hobb::canonical).unwrap_or(hobb);
        }
    }
    hobb
}

/// Column stage for one storey.
pub fn reconstruct_columns<R: Rng + ?Sized>(
    points: &[Point3],
    frame_angle: Option<f64>,
    params: &ColumnParams,
    rng: &mut R,
) -> Vec<ColumnShape> {
    let mut shapes = Vec::new();
    for cluster in cluster_columns(points, params.eps, params.min_pts, params.min_cluster_points) {
        let pts = cluster.gather(points);
        let round = pts.len() > params.curvature_k
            && classify_shape(&pts, params.curvature_k, params.cv_threshold) == ColumnKind::Round;
        if round {
            if let Ok(c) = fit_cylinder_ransac(&pts, params.ransac_threshold, params.ransac_iterations, params.max_radius, rng) {
                shapes.push(ColumnShape::Round(c));
                continue;
            }
        }
        if let Ok(h) = fit_rect_column(&pts) {
            let h = match frame_angle {
                Some(a) => snap_to_frame(&pts, h, a, params.snap_tolerance),
                None => h,
            };
            shapes.push(ColumnShape::Rectangular(h));
        }
    }
    shapes
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn cylinder_shell(cx: f64, cy: f64, r: f64, h: f64, n_around: usize, n_up: usize) -> Vec<Point3> {
        let mut v = Vec::new();
        for i in 0..n_around {
            let a = std::f64::consts::TAU * (i as f64 + 0.5 * (i % 2) as f64) / n_around as f64;
            for j in 0..n_up {
                let z = h * (j as f64 + 0.3 * ((i * 7 + j) % 3) as f64) / n_up as f64;
                v.push(Point3::new(cx + r * a.cos(), cy + r * a.sin(), z));
            }
        }
        v
    }

    fn box_shell(l: f64, w: f64, h: f64, step: f64, yaw: f64) -> Vec<Point3> {
        let mut v = Vec::new();
        let per = 2.0 * (l + w);
        let n = (per / step) as usize;
        for i in 0..n {
            let s = i as f64 * per / n as f64;
            let (x, y) = if s < l {
                (s - 0.5 * l, -0.5 * w)
            } else if s < l + w {
                (0.5 * l, s - l - 0.5 * w)
            } else if s < 2.0 * l + w {
                (0.5 * l - (s - l - w), 0.5 * w)
            } else {
                (-0.5 * l, 0.5 * w - (s - 2.0 * l - w))
            };
            let mut z = 0.0;
            while z <= h {
                v.push(Point3::new(x, y, z).rotate_z(yaw));
                z += step;
            }
        }
        v
    }

    #[test]
    fn classifies_round_and_square() {
        let cyl = cylinder_shell(0.0, 0.0, 0.3, 3.0, 60, 60);
        assert_eq!(classify_shape(&cyl, 20, 0.5), ColumnKind::Round);
        let sq = box_shell(0.4, 0.4, 3.0, 0.02, 0.0);
        assert_eq!(classify_shape(&sq, 20, 0.5), ColumnKind::Rectangular);
        let flat: Vec<Point3> = (0..400).map(|i| Point3::new((i % 20) as f64 * 0.05, 0.0, (i / 20) as f64 * 0.05)).collect();
        assert_eq!(classify_shape(&flat, 20, 0.5), ColumnKind::Rectangular);
    }

    #[test]
    fn cylinder_fit_recovers_radius() {
        let pts = cylinder_shell(1.0, -2.0, 0.3, 3.0, 80, 30);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let c = fit_cylinder_ransac(&pts, 0.01, 200, 2.0, &mut rng).unwrap();
        assert!((c.radius - 0.3).abs() < 0.003);
        assert!(c.base_center.xy().distance(&Point2::new(1.0, -2.0)) < 0.005);
        assert!(c.base_center.z.abs() < 1e-9);
    }

    #[test]
    fn cylinder_fit_fails_on_plane() {
        let pts: Vec<Point3> = (0..2000).map(|i| Point3::new((i % 100) as f64 * 0.04, 0.0, (i / 100) as f64 * 0.1)).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(matches!(fit_cylinder_ransac(&pts, 0.01, 200, 2.0, &mut rng), Err(Error::FitFailed { .. })));
    }

    #[test]
    fn cylinder_fit_is_reproducible() {
        let pts = cylinder_shell(0.0, 0.0, 0.25, 2.0, 50, 20);
        let a = fit_cylinder_ransac(&pts, 0.01, 100, 2.0, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        let b = fit_cylinder_ransac(&pts, 0.01, 100, 2.0, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn rect_column_extents_and_yaw() {
        let pts = box_shell(0.6, 0.4, 3.0, 0.02, 0.0);
        let h = fit_rect_column(&pts).unwrap();
        assert!((h.length - 0.6).abs() < 0.005 && (h.width - 0.4).abs() < 0.005);
        let pts = box_shell(0.6, 0.4, 3.0, 0.02, 30f64.to_radians());
        let h = fit_rect_column(&pts).unwrap();
        assert!((h.yaw.to_degrees() - 30.0).abs() < 1.0);
        assert!(matches!(fit_rect_column(&pts[..2]), Err(Error::DegenerateInput(_))));
    }

    #[test]
    fn small_clusters_dropped() {
        let mut pts = cylinder_shell(0.0, 0.0, 0.3, 3.0, 40, 10);
        pts.extend(cylinder_shell(4.0, 0.0, 0.3, 3.0, 40, 10));
        pts.extend((0..30).map(|i| Point3::new(10.0, 0.0, i as f64 * 0.01)));
        assert_eq!(cluster_columns(&pts, 0.2, 5, 100).len(), 2);
        assert!(cluster_columns(&[], 0.2, 5, 100).is_empty());
    }
}

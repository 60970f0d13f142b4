use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use super::point::{centroid, Point3};
use crate::error::{Error, Result};

/// Plane `normal · p + offset = 0` with the indices of the points it explains.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Plane {
    pub normal: [f64; 3],
    pub offset: f64,
    #[serde(default)]
    pub inlier_indices: Vec<usize>,
}

impl Plane {
    pub fn normal_vector(&self) -> Vector3<f64> {
        Vector3::new(self.normal[0], self.normal[1], self.normal[2])
    }

    pub fn signed_distance(&self, p: &Point3) -> f64 {
        self.normal[0] * p.x + self.normal[1] * p.y + self.normal[2] * p.z + self.offset
    }

    pub fn distance(&self, p: &Point3) -> f64 {
        self.signed_distance(p).abs()
    }

    /// Angle between the two normals ignoring orientation, in radians.
    pub fn angle_to(&self, other: &Plane) -> f64 {
        let c = self.normal_vector().dot(&other.normal_vector()).abs().min(1.0);
        c.acos()
    }
}

/// Scatter matrix of the points about their centroid.
pub(crate) fn scatter_matrix(points: &[Point3], center: &Point3) -> Matrix3<f64> {
    let mut m = Matrix3::zeros();
    for p in points {
        let d = Vector3::new(p.x - center.x, p.y - center.y, p.z - center.z);
        m += d * d.transpose();
    }
    m
}

/// Flips `v` so that its largest-magnitude component is positive.
pub(crate) fn canonical_sign(v: Vector3<f64>) -> Vector3<f64> {
    let mut best = 0;
    for i in 1..3 {
        if v[i].abs() > v[best].abs() {
            best = i;
        }
    }
    if v[best] < 0.0 {
        -v
    } else {
        v
    }
}

/// Least-squares plane through `points`.
///
/// The normal is the right singular vector of the centered point set with the
/// smallest singular value. The returned plane carries no inliers.
pub fn fit_plane_svd(points: &[Point3]) -> Result<Plane> {
    if points.len() < 3 {
        return Err(Error::DegenerateInput(format!(
            "plane fit needs at least 3 points, got {}",
            points.len()
        )));
    }
    let c = centroid(points);
    let scatter = scatter_matrix(points, &c);
    let svd = scatter.svd(false, true);
    let v_t = svd
        .v_t
        .ok_or_else(|| Error::DegenerateInput("SVD did not converge".into()))?;

    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let largest = svd.singular_values[order[0]];
    let middle = svd.singular_values[order[1]];
    if !(largest > 0.0) || middle <= largest * 1e-12 {
        return Err(Error::DegenerateInput(
            "points are coincident or collinear".into(),
        ));
    }

    let row = v_t.row(order[2]);
    let normal = canonical_sign(Vector3::new(row[0], row[1], row[2]).normalize());
    let offset = -normal.dot(&c.to_vector());
    Ok(Plane {
        normal: [normal.x, normal.y, normal.z],
        offset,
        inlier_indices: Vec::new(),
    })
}

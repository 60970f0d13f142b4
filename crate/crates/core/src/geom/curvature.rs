//! Local covariance analysis over k-nearest-neighbour patches.

use nalgebra::{Matrix3, SymmetricEigen, Vector3};
use rayon::prelude::*;

use super::kdtree::KdTree;
use super::plane::canonical_sign;
use super::point::Point3;

/// Eigen-decomposition of the covariance of `points[idx]`, eigenvalues ascending.
fn patch_eigen(points: &[Point3], idx: &[(usize, f64)]) -> ([f64; 3], [Vector3<f64>; 3]) {
    let n = idx.len().max(1) as f64;
    let mut mean = Vector3::zeros();
    for &(i, _) in idx {
        mean += points[i].to_vector();
    }
    mean /= n;
    let mut cov = Matrix3::zeros();
    for &(i, _) in idx {
        let d = points[i].to_vector() - mean;
        cov += d * d.transpose();
    }
    cov /= n;
    let eig = SymmetricEigen::new(cov);
    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.map(|o| eig.eigenvalues[o].max(0.0));
    let vectors = order.map(|o| eig.eigenvectors.column(o).into_owned());
    (values, vectors)
}

/// Surface variation `λ0 / (λ0 + λ1 + λ2)` of each point's `k`-neighbourhood
/// (the point itself included). Degenerate neighbourhoods give 0.
pub fn local_curvature(points: &[Point3], k: usize) -> Vec<f64> {
    let tree = KdTree::new(points);
    points
        .par_iter()
        .map(|p| {
            let nb = tree.nearest_k(p, k);
            let (l, _) = patch_eigen(points, &nb);
            let sum = l[0] + l[1] + l[2];
            if sum > 0.0 {
                l[0] / sum
            } else {
                0.0
            }
        })
        .collect()
}

/// Unit normals from the least-variance direction of each point's
/// `k`-neighbourhood, sign-canonicalised (largest component positive).
pub fn estimate_normals(points: &[Point3], k: usize) -> Vec<[f64; 3]> {
    let tree = KdTree::new(points);
    points
        .par_iter()
        .map(|p| {
            let nb = tree.nearest_k(p, k);
            if nb.len() < 3 {
                return [0.0, 0.0, 1.0];
            }
            let (_, v) = patch_eigen(points, &nb);
            let n = canonical_sign(v[0].normalize());
            if n.iter().all(|c| c.is_finite()) {
                [n.x, n.y, n.z]
            } else {
                [0.0, 0.0, 1.0]
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn plane_has_near_zero_curvature() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let pts: Vec<Point3> = (0..2000)
            .map(|_| Point3::new(rng.random::<f64>() * 2.0, rng.random::<f64>() * 2.0, 1.0))
            .collect();
        let c = local_curvature(&pts, 12);
        assert!(c.iter().all(|&v| v < 0.01));
        let normals = estimate_normals(&pts, 12);
        assert!(normals.iter().all(|n| (n[2] - 1.0).abs() < 1e-9));
    }

    #[test]
    fn coincident_points_give_zero() {
        let pts = vec![Point3::new(1.0, 2.0, 3.0); 30];
        assert!(local_curvature(&pts, 8).iter().all(|&v| v == 0.0));
    }
}

use std::cmp::Ordering;
use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use super::kdtree::KdTree;
use super::point::Point3;
use crate::cloud::SemanticClass;

/// A group of points, by index into the source cloud.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cluster {
    pub point_indices: Vec<usize>,
    pub label: SemanticClass,
}

impl Cluster {
    pub fn len(&self) -> usize {
        self.point_indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.point_indices.is_empty()
    }

    pub fn gather(&self, points: &[Point3]) -> Vec<Point3> {
        self.point_indices.iter().map(|&i| points[i]).collect()
    }
}

/// Density-based clustering.
///
/// A point is core when at least `min_pts` points (itself included) lie
/// within `eps`. Clusters are the connected components of core points; a
/// border point joins the cluster of its nearest core neighbour, ties broken
/// by the neighbour's coordinates so the partition does not depend on input
/// order. Noise points belong to no cluster. Clusters are sorted by their
/// smallest index and their indices are ascending.
pub fn dbscan(points: &[Point3], eps: f64, min_pts: usize, label: SemanticClass) -> Vec<Cluster> {
    dbscan_labels(points, eps, min_pts)
        .into_iter()
        .map(|point_indices| Cluster { point_indices, label })
        .collect()
}

pub(crate) fn dbscan_labels(points: &[Point3], eps: f64, min_pts: usize) -> Vec<Vec<usize>> {
    let n = points.len();
    if n == 0 {
        return Vec::new();
    }
    let tree = KdTree::new(points);
    let neighbours: Vec<Vec<usize>> = points.iter().map(|p| tree.within_radius(p, eps)).collect();
    let core: Vec<bool> = neighbours.iter().map(|nb| nb.len() >= min_pts.max(1)).collect();

    const UNSET: usize = usize::MAX;
    let mut component = vec![UNSET; n];
    let mut n_components = 0;
    let mut queue = VecDeque::new();
    for start in 0..n {
        if !core[start] || component[start] != UNSET {
            continue;
        }
        component[start] = n_components;
        queue.push_back(start);
        while let Some(i) = queue.pop_front() {
            for &j in &neighbours[i] {
                if core[j] && component[j] == UNSET {
                    component[j] = n_components;
                    queue.push_back(j);
                }
            }
        }
        n_components += 1;
    }

    for i in 0..n {
        if core[i] {
            continue;
        }
        let nearest = neighbours[i]
            .iter()
            .copied()
            .filter(|&j| core[j])
            .min_by(|&a, &b| {
                let da = points[a].distance_squared(&points[i]);
                let db = points[b].distance_squared(&points[i]);
                da.total_cmp(&db).then_with(|| lexicographic(&points[a], &points[b]))
            });
        if let Some(j) = nearest {
            component[i] = component[j];
        }
    }

    let mut clusters = vec![Vec::new(); n_components];
    for (i, &c) in component.iter().enumerate() {
        if c != UNSET {
            clusters[c].push(i);
        }
    }
    clusters.retain(|c| !c.is_empty());
    clusters.sort_by_key(|c| c[0]);
    clusters
}

fn lexicographic(a: &Point3, b: &Point3) -> Ordering {
    a.x.total_cmp(&b.x)
        .then(a.y.total_cmp(&b.y))
        .then(a.z.total_cmp(&b.z))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn blob(cx: f64, n: usize) -> Vec<Point3> {
        (0..n)
            .map(|i| Point3::new(cx + 0.05 * (i % 5) as f64, 0.05 * (i / 5) as f64, 0.0))
            .collect()
    }

    #[test]
    fn two_blobs() {
        let mut pts = blob(0.0, 25);
        pts.extend(blob(10.0, 25));
        let clusters = dbscan(&pts, 0.5, 4, SemanticClass::Wall);
        assert_eq!(clusters.len(), 2);
        assert_eq!(clusters[0].point_indices, (0..25).collect::<Vec<_>>());
        assert_eq!(clusters[1].point_indices, (25..50).collect::<Vec<_>>());
    }

    #[test]
    fn isolated_points_are_noise() {
        let pts = [
            Point3::new(0.0, 0.0, 0.0),
            Point3::new(5.0, 0.0, 0.0),
            Point3::new(0.0, 5.0, 0.0),
        ];
        assert!(dbscan(&pts, 0.5, 4, SemanticClass::Column).is_empty());
        assert!(dbscan(&[], 0.5, 4, SemanticClass::Column).is_empty());
    }

    #[test]
    fn min_pts_one_makes_every_point_core() {
        let pts = [Point3::new(0.0, 0.0, 0.0), Point3::new(5.0, 0.0, 0.0)];
        assert_eq!(dbscan(&pts, 0.5, 1, SemanticClass::Wall).len(), 2);
    }
}

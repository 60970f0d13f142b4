use std::collections::HashSet;

use rayon::prelude::*;

use crate::geom::Point3;
use crate::model::Geometry;

#[derive(Debug, Clone, PartialEq)]
pub struct VoxelGrid {
    pub origin: Point3,
    pub voxel_size: f64,
    pub occupied: HashSet<[i64; 3]>,
}

impl VoxelGrid {
    pub fn len(&self) -> usize {
        self.occupied.len()
    }

    pub fn is_empty(&self) -> bool {
        self.occupied.is_empty()
    }

    pub fn center(&self, idx: [i64; 3]) -> Point3 {
        let s = self.voxel_size;
        Point3::new(
            self.origin.x + (idx[0] as f64 + 0.5) * s,
            self.origin.y + (idx[1] as f64 + 0.5) * s,
            self.origin.z + (idx[2] as f64 + 0.5) * s,
        )
    }
}

fn index_range(lo: f64, hi: f64, origin: f64, s: f64) -> (i64, i64) {
    (((lo - origin) / s - 0.5).floor() as i64, ((hi - origin) / s - 0.5).ceil() as i64)
}

/// Voxels whose centre lies inside any of the elements.
pub fn voxelize(elements: &[Geometry], voxel_size: f64, origin: Point3) -> VoxelGrid {
    let occupied = elements
        .par_iter()
        .map(|g| {
            let mut set = HashSet::new();
            let (lo, hi) = g.aabb();
            let (x0, x1) = index_range(lo.x, hi.x, origin.x, voxel_size);
            let (y0, y1) = index_range(lo.y, hi.y, origin.y, voxel_size);
            let (z0, z1) = index_range(lo.z, hi.z, origin.z, voxel_size);
            for i in x0..=x1 {
                let x = origin.x + (i as f64 + 0.5) * voxel_size;
                for j in y0..=y1 {
                    let y = origin.y + (j as f64 + 0.5) * voxel_size;
                    for k in z0..=z1 {
                        let z = origin.z + (k as f64 + 0.5) * voxel_size;
                        if g.contains(&Point3::new(x, y, z)) {
                            set.insert([i, j, k]);
                        }
                    }
                }
            }
            set
        })
        .reduce(HashSet::new, |mut a, b| {
            if a.len() < b.len() {
                return b.into_iter().chain(a).collect();
            }
            a.extend(b);
            a
        });
    VoxelGrid {
        origin,
        voxel_size,
        occupied,
    }
}

/// Component-wise minimum of the joint bounds, floored to a multiple of the
/// voxel size. `None` when both lists are empty.
pub fn grid_origin(a: &[Geometry], b: &[Geometry], voxel_size: f64) -> Option<Point3> {
    let mut it = a.iter().chain(b).map(|g| g.aabb().0);
    let first = it.next()?;
    let m = it.fold(first, |m, p| Point3::new(m.x.min(p.x), m.y.min(p.y), m.z.min(p.z)));
    let snap = |v: f64| (v / voxel_size).floor() * voxel_size;
    Some(Point3::new(snap(m.x), snap(m.y), snap(m.z)))
}

/// Class-level voxel IoU of two element sets on a shared grid.
pub fn viou(pred: &[Geometry], gt: &[Geometry], voxel_size: f64) -> f64 {
    let Some(origin) = grid_origin(pred, gt, voxel_size) else { return 1.0 };
    let p = voxelize(pred, voxel_size, origin);
    let g = voxelize(gt, voxel_size, origin);
    match (p.is_empty(), g.is_empty()) {
        (true, true) => return 1.0,
        (true, false) | (false, true) => return 0.0,
        _ => {}
    }
    let inter = p.occupied.intersection(&g.occupied).count();
    let union = p.len() + g.len() - inter;
    inter as f64 / union as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::Hobb;

    fn cube(x: f64) -> Geometry {
        Geometry::Box(Hobb::new(Point3::new(x, 0.5, 0.5), 1.0, 1.0, 1.0, 0.0))
    }

    #[test]
    fn unit_cube_count() {
        let g = voxelize(&[cube(0.5)], 0.05, Point3::default());
        assert_eq!(g.len(), 8000);
        assert!(voxelize(&[], 0.05, Point3::default()).is_empty());
    }

    #[test]
    fn offset_cubes() {
        let v = viou(&[cube(0.5)], &[cube(1.0)], 0.05);
        assert!((v - 1.0 / 3.0).abs() < 0.02);
        assert_eq!(viou(&[cube(0.5)], &[cube(0.5)], 0.05), 1.0);
        assert_eq!(viou(&[], &[], 0.05), 1.0);
        assert_eq!(viou(&[cube(0.5)], &[], 0.05), 0.0);
    }

    #[test]
    fn union_semantics() {
        let o = Point3::new(-1.0, -1.0, -1.0);
        let both = voxelize(&[cube(0.5), cube(1.0)], 0.1, o);
        let mut expect = voxelize(&[cube(0.5)], 0.1, o).occupied;
        expect.extend(voxelize(&[cube(1.0)], 0.1, o).occupied);
        assert_eq!(both.occupied, expect);
    }
}

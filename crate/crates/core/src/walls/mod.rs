//! Wall reconstruction: direction filtering, per-axis clustering, plane
//! extraction and wall solid assembly.

pub mod assemble;
pub mod hysac;
pub mod manhattan;

pub use assemble::{assemble_wall_instances, AssemblyParams};
pub use hysac::{hysac_planes, HysacConfig, SeedStrategy};
pub use manhattan::{estimate_manhattan_frame, manhattan_angle_from_normals, split_by_direction, WallAxis};

use crate::cloud::SemanticClass;
use crate::geom::{dbscan, Cluster, Point3};

/// DBSCAN over the points of one wall direction; noise is dropped.
pub fn cluster_walls_per_axis(points: &[Point3], eps: f64, min_pts: usize) -> Vec<Cluster> {
    dbscan(points, eps, min_pts, SemanticClass::Wall)
}

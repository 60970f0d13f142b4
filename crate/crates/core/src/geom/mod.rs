//! Geometric primitives shared by every reconstruction stage.

pub mod curvature;
pub mod dbscan;
pub mod hobb;
pub mod kdtree;
pub mod plane;
pub mod point;
pub mod polygon;

pub use curvature::{estimate_normals, local_curvature};
pub use dbscan::{dbscan, Cluster};
pub use hobb::{hobb_with_yaw, min_area_hobb, Aabb, Cylinder, Hobb};
pub use kdtree::KdTree;
pub use plane::{fit_plane_svd, Plane};
pub use point::{angle_diff, centroid, wrap_angle, Point2, Point3};
pub use polygon::{clip_convex, convex_hull_2d, convex_intersection_area, polygon_area, reduce_hull_to_quad};

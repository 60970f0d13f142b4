//! Reconstruction of walls, doors and columns from semantically labeled
//! building point clouds, with evaluation against reference models and IFC
//! export.

pub mod cloud;
pub mod columns;
pub mod config;
pub mod doors;
pub mod error;
pub mod geom;
pub mod io;
pub mod metrics;
pub mod model;
pub mod pipeline;
pub mod storey;
pub mod synth;
pub mod topology;
pub mod walls;

pub use cloud::{LabelMap, LabeledPointCloud, SemanticClass};
pub use config::PipelineConfig;
pub use error::{Error, Result};
pub use geom::{Cylinder, Hobb, Plane, Point2, Point3};
pub use model::{BimModel, ColumnInstance, ColumnShape, DoorInstance, ElementId, Geometry, WallInstance};
pub use storey::StoreyInterval;
pub use pipeline::{reconstruct, Reconstruction};

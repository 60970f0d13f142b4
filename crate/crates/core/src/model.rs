//! Reconstructed (or ground-truth) building models.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::cloud::SemanticClass;
use crate::config::PipelineConfig;
use crate::error::{Error, Result};
use crate::geom::{Aabb, Cylinder, Hobb, Plane, Point3};
use crate::storey::StoreyInterval;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ElementId(pub u32);

impl fmt::Display for ElementId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WallInstance {
    pub id: ElementId,
    pub storey: usize,
    #[serde(rename = "box")]
    pub hobb: Hobb,
    #[serde(default)]
    pub source_planes: Vec<Plane>,
}

/// A door, stored as a child of the wall it sits in. The box length runs
/// along the parent wall and its width equals the wall thickness.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DoorInstance {
    pub id: ElementId,
    pub parent_wall_id: ElementId,
    #[serde(rename = "box")]
    pub hobb: Hobb,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ColumnShape {
    Round(Cylinder),
    Rectangular(Hobb),
}

impl ColumnShape {
    pub fn is_round(&self) -> bool {
        matches!(self, ColumnShape::Round(_))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnInstance {
    pub id: ElementId,
    pub storey: usize,
    pub shape: ColumnShape,
}

/// Solid geometry of any element.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Geometry {
    Box(Hobb),
    Cylinder(Cylinder),
}

impl Geometry {
    pub fn contains(&self, p: &Point3) -> bool {
        match self {
            Geometry::Box(b) => b.contains(p, 0.0),
            Geometry::Cylinder(c) => c.contains(p, 0.0),
        }
    }

    pub fn aabb(&self) -> Aabb {
        match self {
            Geometry::Box(b) => b.aabb(),
            Geometry::Cylinder(c) => c.aabb(),
        }
    }

    pub fn volume(&self) -> f64 {
        match self {
            Geometry::Box(b) => b.volume(),
            Geometry::Cylinder(c) => c.volume(),
        }
    }
}

impl From<ColumnShape> for Geometry {
    fn from(s: ColumnShape) -> Self {
        match s {
            ColumnShape::Round(c) => Geometry::Cylinder(c),
            ColumnShape::Rectangular(b) => Geometry::Box(b),
        }
    }
}

/// Where a model came from; for reconstructions this is the exact
/// configuration and seed of the run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub generator: String,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config: Option<PipelineConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BimModel {
    pub schema_version: u32,
    pub storeys: Vec<StoreyInterval>,
    pub walls: Vec<WallInstance>,
    pub doors: Vec<DoorInstance>,
    pub columns: Vec<ColumnInstance>,
    pub provenance: Provenance,
}

impl BimModel {
    pub fn empty(provenance: Provenance) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            storeys: Vec::new(),
            walls: Vec::new(),
            doors: Vec::new(),
            columns: Vec::new(),
            provenance,
        }
    }

    pub fn wall(&self, id: ElementId) -> Option<&WallInstance> {
        self.walls.iter().find(|w| w.id == id)
    }

    /// Storey of a door, through its parent wall.
    pub fn door_storey(&self, door: &DoorInstance) -> Option<usize> {
        self.wall(door.parent_wall_id).map(|w| w.storey)
    }

    pub fn geometries(&self, class: SemanticClass) -> Vec<Geometry> {
        match class {
            SemanticClass::Wall => self.walls.iter().map(|w| Geometry::Box(w.hobb)).collect(),
            SemanticClass::Door => self.doors.iter().map(|d| Geometry::Box(d.hobb)).collect(),
            SemanticClass::Column => self.columns.iter().map(|c| c.shape.into()).collect(),
            _ => Vec::new(),
        }
    }

    /// Checks id uniqueness, parent links and storey references.
    pub fn validate(&self) -> Result<()> {
        let mut ids = BTreeSet::new();
        let all_ids = self
            .walls
            .iter()
            .map(|w| w.id)
            .chain(self.doors.iter().map(|d| d.id))
            .chain(self.columns.iter().map(|c| c.id));
        for id in all_ids {
            if !ids.insert(id) {
                return Err(Error::Validation(format!("duplicate element id {id}")));
            }
        }
        for (i, s) in self.storeys.iter().enumerate() {
            if s.index != i {
                return Err(Error::Validation(format!("storey {i} carries index {}", s.index)));
            }
            if !(s.ceiling_z > s.floor_z) {
                return Err(Error::Validation(format!("storey {i} has ceiling below floor")));
            }
            if i > 0 && s.floor_z < self.storeys[i - 1].ceiling_z {
                return Err(Error::Validation(format!("storey {i} overlaps storey {}", i - 1)));
            }
        }
        let n = self.storeys.len();
        if let Some(w) = self.walls.iter().find(|w| w.storey >= n) {
            return Err(Error::Validation(format!("wall {} references missing storey {}", w.id, w.storey)));
        }
        if let Some(c) = self.columns.iter().find(|c| c.storey >= n) {
            return Err(Error::Validation(format!("column {} references missing storey {}", c.id, c.storey)));
        }
        for d in &self.doors {
            if self.wall(d.parent_wall_id).is_none() {
                return Err(Error::Validation(format!(
                    "door {} references missing parent wall {}",
                    d.id, d.parent_wall_id
                )));
            }
        }
        Ok(())
    }
}

//! Labeled point clouds, the sole input of the reconstruction.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::Point3;

/// Closed set of semantic classes consumed by the pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SemanticClass {
    Wall,
    Door,
    Column,
    Floor,
    Ceiling,
    Clutter,
}

impl SemanticClass {
    pub const ALL: [SemanticClass; 6] = [
        SemanticClass::Wall,
        SemanticClass::Door,
        SemanticClass::Column,
        SemanticClass::Floor,
        SemanticClass::Ceiling,
        SemanticClass::Clutter,
    ];

    /// Integer code used by the on-disk formats.
    pub fn code(self) -> i64 {
        match self {
            SemanticClass::Wall => 0,
            SemanticClass::Door => 1,
            SemanticClass::Column => 2,
            SemanticClass::Floor => 3,
            SemanticClass::Ceiling => 4,
            SemanticClass::Clutter => 5,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SemanticClass::Wall => "wall",
            SemanticClass::Door => "door",
            SemanticClass::Column => "column",
            SemanticClass::Floor => "floor",
            SemanticClass::Ceiling => "ceiling",
            SemanticClass::Clutter => "clutter",
        }
    }
}

impl fmt::Display for SemanticClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Maps integer labels found in files to classes. Unknown integers become
/// [`SemanticClass::Clutter`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelMap {
    pub entries: BTreeMap<i64, SemanticClass>,
}

impl Default for LabelMap {
    fn default() -> Self {
        Self {
            entries: SemanticClass::ALL.iter().map(|c| (c.code(), *c)).collect(),
        }
    }
}

impl LabelMap {
    pub fn lookup(&self, raw: i64) -> Option<SemanticClass> {
        self.entries.get(&raw).copied()
    }

    /// Parses a remap table such as `"0=wall,7=door,8=clutter"`.
    pub fn parse(spec: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for item in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (k, v) = item
                .split_once('=')
                .ok_or_else(|| Error::InvalidConfig(format!("label map entry `{item}` lacks `=`")))?;
            let code: i64 = k
                .trim()
                .parse()
                .map_err(|_| Error::InvalidConfig(format!("label code `{k}` is not an integer")))?;
            let class = SemanticClass::ALL
                .iter()
                .copied()
                .find(|c| c.name() == v.trim())
                .ok_or_else(|| Error::InvalidConfig(format!("unknown class `{v}`")))?;
            entries.insert(code, class);
        }
        Ok(Self { entries })
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct LabeledPointCloud {
    pub points: Vec<Point3>,
    pub labels: Vec<SemanticClass>,
    pub colors: Option<Vec<[u8; 3]>>,
}

impl LabeledPointCloud {
    pub fn new(points: Vec<Point3>, labels: Vec<SemanticClass>) -> Result<Self> {
        let cloud = Self {
            points,
            labels,
            colors: None,
        };
        cloud.validate()?;
        Ok(cloud)
    }

    pub fn validate(&self) -> Result<()> {
        if self.points.len() != self.labels.len() {
            return Err(Error::Validation(format!(
                "{} points but {} labels",
                self.points.len(),
                self.labels.len()
            )));
        }
        if let Some(c) = &self.colors {
            if c.len() != self.points.len() {
                return Err(Error::Validation("color count differs from point count".into()));
            }
        }
        if let Some(i) = self.points.iter().position(|p| !p.is_finite()) {
            return Err(Error::Validation(format!("point {i} has a non-finite coordinate")));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Indices of points carrying `class`.
    pub fn indices_of(&self, class: SemanticClass) -> Vec<usize> {
        self.labels
            .iter()
            .enumerate()
            .filter(|(_, &l)| l == class)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn points_of(&self, class: SemanticClass) -> Vec<Point3> {
        self.labels
            .iter()
            .zip(&self.points)
            .filter(|(&l, _)| l == class)
            .map(|(_, p)| *p)
            .collect()
    }

    /// Sub-cloud with the points at `indices`, in that order.
    pub fn subset(&self, indices: &[usize]) -> LabeledPointCloud {
        LabeledPointCloud {
            points: indices.iter().map(|&i| self.points[i]).collect(),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            colors: self
                .colors
                .as_ref()
                .map(|c| indices.iter().map(|&i| c[i]).collect()),
        }
    }

    pub fn class_counts(&self) -> BTreeMap<SemanticClass, usize> {
        let mut counts = BTreeMap::new();
        for l in &self.labels {
            *counts.entry(*l).or_insert(0) += 1;
        }
        counts
    }
}

//! Pipeline configuration: one flat document of dimensioned keys.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::columns::ColumnParams;
use crate::doors::DoorParams;
use crate::error::{Error, Result};
use crate::storey::StoreyParams;
use crate::topology::TopologyConfig;
use crate::walls::{AssemblyParams, HysacConfig, SeedStrategy};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub seed: u64,
    pub normal_k: usize,
    pub voxel_size_m: f64,

    pub storey_bin_height_m: f64,
    pub storey_peak_min_fraction: f64,
    pub storey_min_height_m: f64,

    pub wall_vertical_normal_tol_deg: f64,
    pub wall_dbscan_eps_m: f64,
    pub wall_dbscan_min_pts: usize,
    pub wall_seeding: SeedStrategy,
    pub wall_parallel_angle_deg: f64,
    pub wall_max_thickness_m: f64,
    pub wall_default_thickness_m: f64,

    pub hysac_n_bins: usize,
    pub hysac_n_seeds: usize,
    pub hysac_min_points: usize,
    pub hysac_distance_threshold_m: f64,
    pub hysac_min_inlier_ratio: f64,
    pub hysac_max_trials: usize,

    pub topology_refinement: bool,
    pub topo_intersection_radius_m: f64,
    pub topo_perpendicular_tol_deg: f64,
    pub topo_merge_distance_m: f64,
    pub topo_collinear_angle_tol_deg: f64,
    pub topo_collinear_lateral_tol_m: f64,
    pub topo_max_iterations: usize,

    pub door_wall_margin_m: f64,
    pub door_cluster_eps_m: f64,
    pub door_expansion_radius_m: f64,
    pub door_max_width_m: f64,
    pub door_split_spacing_m: f64,
    pub door_min_points: usize,

    pub column_dbscan_eps_m: f64,
    pub column_dbscan_min_pts: usize,
    pub column_min_cluster_points: usize,
    pub column_curvature_k: usize,
    pub column_cv_threshold: f64,
    pub column_ransac_threshold_m: f64,
    pub column_ransac_iterations: usize,
    pub column_max_radius_m: f64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            seed: 42,
            normal_k: 12,
            voxel_size_m: 0.05,

            storey_bin_height_m: 0.1,
            storey_peak_min_fraction: 0.05,
            storey_min_height_m: 2.0,

            wall_vertical_normal_tol_deg: 20.0,
            wall_dbscan_eps_m: 0.3,
            wall_dbscan_min_pts: 10,
            wall_seeding: SeedStrategy::Histogram,
            wall_parallel_angle_deg: 10.0,
            wall_max_thickness_m: 0.5,
            wall_default_thickness_m: 0.2,

            hysac_n_bins: 50,
            hysac_n_seeds: 10,
            hysac_min_points: 100,
            hysac_distance_threshold_m: 0.05,
            hysac_min_inlier_ratio: 0.1,
            hysac_max_trials: 10,

            topology_refinement: true,
            topo_intersection_radius_m: 0.3,
            topo_perpendicular_tol_deg: 10.0,
            topo_merge_distance_m: 0.15,
            topo_collinear_angle_tol_deg: 5.0,
            topo_collinear_lateral_tol_m: 0.05,
            topo_max_iterations: 10,

            door_wall_margin_m: 0.05,
            door_cluster_eps_m: 0.15,
            door_expansion_radius_m: 1.0,
            door_max_width_m: 1.4,
            door_split_spacing_m: 0.1,
            door_min_points: 50,

            column_dbscan_eps_m: 0.2,
            column_dbscan_min_pts: 5,
            column_min_cluster_points: 100,
            column_curvature_k: 40,
            column_cv_threshold: 0.5,
            column_ransac_threshold_m: 0.01,
            column_ransac_iterations: 500,
            column_max_radius_m: 2.0,
        }
    }
}

impl PipelineConfig {
    /// The ablation baseline: uniform random seeding and no topology stage.
    pub fn baseline(mut self) -> Self {
        self.wall_seeding = SeedStrategy::Uniform;
        self.topology_refinement = false;
        self
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes to TOML")
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_toml_string())?;
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("voxel_size_m", self.voxel_size_m),
            ("storey_bin_height_m", self.storey_bin_height_m),
            ("storey_peak_min_fraction", self.storey_peak_min_fraction),
            ("storey_min_height_m", self.storey_min_height_m),
            ("wall_vertical_normal_tol_deg", self.wall_vertical_normal_tol_deg),
            ("wall_dbscan_eps_m", self.wall_dbscan_eps_m),
            ("wall_parallel_angle_deg", self.wall_parallel_angle_deg),
            ("wall_max_thickness_m", self.wall_max_thickness_m),
            ("wall_default_thickness_m", self.wall_default_thickness_m),
            ("door_wall_margin_m", self.door_wall_margin_m),
            ("door_cluster_eps_m", self.door_cluster_eps_m),
            ("door_expansion_radius_m", self.door_expansion_radius_m),
            ("door_max_width_m", self.door_max_width_m),
            ("column_dbscan_eps_m", self.column_dbscan_eps_m),
            ("column_cv_threshold", self.column_cv_threshold),
            ("column_ransac_threshold_m", self.column_ransac_threshold_m),
            ("column_max_radius_m", self.column_max_radius_m),
        ];
        for (key, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidConfig(format!("{key} must be positive, got {v}")));
            }
        }
        if !(self.door_split_spacing_m >= 0.0) {
            return Err(Error::InvalidConfig("door_split_spacing_m must be non-negative".into()));
        }
        if self.wall_default_thickness_m > self.wall_max_thickness_m {
            return Err(Error::InvalidConfig(
                "wall_default_thickness_m exceeds wall_max_thickness_m".into(),
            ));
        }
        if self.normal_k < 3 || self.column_curvature_k < 4 {
            return Err(Error::InvalidConfig("normal_k must be ≥ 3 and column_curvature_k ≥ 4".into()));
        }
        if self.wall_dbscan_min_pts == 0 || self.column_dbscan_min_pts == 0 || self.column_ransac_iterations == 0 {
            return Err(Error::InvalidConfig("point counts and iteration counts must be at least 1".into()));
        }
        self.hysac().validate()?;
        self.topology().validate()
    }

    pub fn storey(&self) -> StoreyParams {
        StoreyParams {
            bin_height: self.storey_bin_height_m,
            peak_min_fraction: self.storey_peak_min_fraction,
            min_storey_height: self.storey_min_height_m,
        }
    }

    pub fn hysac(&self) -> HysacConfig {
        HysacConfig {
            n_bins: self.hysac_n_bins,
            n_seeds: self.hysac_n_seeds,
            min_points: self.hysac_min_points,
            distance_threshold: self.hysac_distance_threshold_m,
            min_inlier_ratio: self.hysac_min_inlier_ratio,
            max_trials: self.hysac_max_trials,
        }
    }

    pub fn assembly(&self) -> AssemblyParams {
        AssemblyParams {
            parallel_angle: self.wall_parallel_angle_deg.to_radians(),
            max_thickness: self.wall_max_thickness_m,
            default_thickness: self.wall_default_thickness_m,
            ..AssemblyParams::default()
        }
    }

    pub fn topology(&self) -> TopologyConfig {
        TopologyConfig {
            intersection_radius: self.topo_intersection_radius_m,
            merge_distance: self.topo_merge_distance_m,
            collinear_angle_tol: self.topo_collinear_angle_tol_deg.to_radians(),
            collinear_lateral_tol: self.topo_collinear_lateral_tol_m,
            perpendicular_tol: self.topo_perpendicular_tol_deg.to_radians(),
            max_iterations: self.topo_max_iterations,
        }
    }

    pub fn doors(&self) -> DoorParams {
        DoorParams {
            wall_margin: self.door_wall_margin_m,
            cluster_eps: self.door_cluster_eps_m,
            expansion_radius: self.door_expansion_radius_m,
            max_width: self.door_max_width_m,
            split_spacing: self.door_split_spacing_m,
            min_points: self.door_min_points,
        }
    }

    pub fn columns(&self) -> ColumnParams {
        ColumnParams {
            eps: self.column_dbscan_eps_m,
            min_pts: self.column_dbscan_min_pts,
            min_cluster_points: self.column_min_cluster_points,
            curvature_k: self.column_curvature_k,
            cv_threshold: self.column_cv_threshold,
            ransac_threshold: self.column_ransac_threshold_m,
            ransac_iterations: self.column_ransac_iterations,
            max_radius: self.column_max_radius_m,
            ..ColumnParams::default()
        }
    }
}

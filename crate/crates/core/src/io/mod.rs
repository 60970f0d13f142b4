//! Reading and writing point clouds, models and IFC files.

mod bim_json;
mod ifc;
mod ply;
mod xyz;

pub use bim_json::{read_bim_json, write_bim_json};
pub use ifc::{export_ifc_string, ifc_guid, parse_spf, SpfSummary};
pub use ply::{parse_ply, write_ply, PlyEncoding};
pub use xyz::{parse_xyz_label, write_xyz_label};

use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::cloud::{LabelMap, LabeledPointCloud};
use crate::error::{Error, Result};
use crate::model::BimModel;

/// Counters gathered while reading a point cloud.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ReadStats {
    /// Points whose label had no class mapping and became clutter.
    pub unknown_labels: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CloudFormat {
    Ply,
    XyzLabel,
}

impl FromStr for CloudFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ply" => Ok(CloudFormat::Ply),
            "xyz" | "xyz-label" | "xyzl" | "txt" => Ok(CloudFormat::XyzLabel),
            other => Err(Error::UnsupportedFormat(format!("point cloud format '{other}'"))),
        }
    }
}

impl CloudFormat {
    pub fn from_path(path: &Path) -> Result<Self> {
        let ext = path.extension().and_then(|e| e.to_str()).unwrap_or("");
        ext.parse()
    }
}

pub fn read_point_cloud(path: &Path, format: Option<CloudFormat>, map: &LabelMap) -> Result<(LabeledPointCloud, ReadStats)> {
    let format = match format {
        Some(f) => f,
        None => CloudFormat::from_path(path)?,
    };
    let bytes = std::fs::read(path)?;
    match format {
        CloudFormat::Ply => parse_ply(&bytes, map),
        CloudFormat::XyzLabel => {
            let text = std::str::from_utf8(&bytes).map_err(|e| Error::parse(format!("byte {}", e.valid_up_to()), "not UTF-8 text"))?;
            parse_xyz_label(text, map)
        }
    }
}

pub fn write_point_cloud(path: &Path, cloud: &LabeledPointCloud, format: CloudFormat) -> Result<()> {
    let mut buf = Vec::new();
    match format {
        CloudFormat::Ply => write_ply(&mut buf, cloud, PlyEncoding::BinaryLittleEndian)?,
        CloudFormat::XyzLabel => write_xyz_label(&mut buf, cloud)?,
    }
    write_atomic(path, &buf)
}

/// Writes via a temporary sibling file and a rename, so readers never see a
/// partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("out");
    let tmp: PathBuf = dir.join(format!(".{name}.tmp{}", std::process::id()));
    std::fs::write(&tmp, bytes)?;
    std::fs::rename(&tmp, path).inspect_err(|_| {
        let _ = std::fs::remove_file(&tmp);
    })?;
    Ok(())
}

pub fn load_bim_json(path: &Path) -> Result<BimModel> {
    read_bim_json(&std::fs::read_to_string(path)?)
}

pub fn save_bim_json(path: &Path, model: &BimModel) -> Result<()> {
    write_atomic(path, write_bim_json(model).as_bytes())
}

pub fn export_ifc(model: &BimModel, path: &Path) -> Result<()> {
    write_atomic(path, export_ifc_string(model, model.provenance.seed).as_bytes())
}

//! Storey detection from the vertical point density.

use serde::{Deserialize, Serialize};

use crate::cloud::LabeledPointCloud;
use crate::error::{Error, Result};

/// One building level, bounded by its floor and ceiling surfaces.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StoreyInterval {
    pub index: usize,
    pub floor_z: f64,
    pub ceiling_z: f64,
}

impl StoreyInterval {
    pub fn height(&self) -> f64 {
        self.ceiling_z - self.floor_z
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StoreyParams {
    pub bin_height: f64,
    /// A bin must hold more than this fraction of all points to be a peak.
    pub peak_min_fraction: f64,
    /// Peak pairs closer than this are a double slab, not a storey.
    pub min_storey_height: f64,
}

impl Default for StoreyParams {
    fn default() -> Self {
        Self {
            bin_height: 0.1,
            peak_min_fraction: 0.05,
            min_storey_height: 2.0,
        }
    }
}

/// Heights of horizontal surface concentrations, ascending.
///
/// A peak is a histogram bin holding more than `peak_min_fraction` of the
/// points that is not lower than its left neighbour and strictly higher than
/// its right one. Its height is the mean z of the points in the bin.
pub fn density_peaks(z: &[f64], bin_height: f64, peak_min_fraction: f64) -> Vec<f64> {
    if z.is_empty() || !(bin_height > 0.0) {
        return Vec::new();
    }
    let z_min = z.iter().copied().fold(f64::INFINITY, f64::min);
    let z_max = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let n_bins = ((z_max - z_min) / bin_height).floor() as usize + 1;
    let mut counts = vec![0usize; n_bins];
    let mut sums = vec![0.0f64; n_bins];
    for &v in z {
        let b = (((v - z_min) / bin_height) as usize).min(n_bins - 1);
        counts[b] += 1;
        sums[b] += v;
    }
    let threshold = peak_min_fraction * z.len() as f64;
    (0..n_bins)
        .filter(|&i| {
            let c = counts[i];
            let left = if i > 0 { counts[i - 1] } else { 0 };
            let right = if i + 1 < n_bins { counts[i + 1] } else { 0 };
            c as f64 > threshold && c >= left && c > right
        })
        .map(|i| sums[i] / counts[i] as f64)
        .collect()
}

/// Pairs density peaks bottom-up into (floor, ceiling) storeys.
///
/// The lowest unpaired peak is a floor; the next peak at least
/// `min_storey_height` above it closes the storey. Peaks in between are
/// ignored, and a trailing unpaired peak is folded into the last storey.
pub fn pair_peaks(peaks: &[f64], min_storey_height: f64) -> Vec<StoreyInterval> {
    let mut storeys = Vec::new();
    let mut floor: Option<f64> = None;
    for &z in peaks {
        match floor {
            None => floor = Some(z),
            Some(f) if z - f >= min_storey_height => {
                storeys.push(StoreyInterval {
                    index: storeys.len(),
                    floor_z: f,
                    ceiling_z: z,
                });
                floor = None;
            }
            Some(_) => {}
        }
    }
    storeys
}

pub fn detect_storeys(cloud: &LabeledPointCloud, params: &StoreyParams) -> Result<Vec<StoreyInterval>> {
    if cloud.is_empty() {
        return Err(Error::DegenerateInput("empty point cloud".into()));
    }
    if !(params.bin_height > 0.0) {
        return Err(Error::InvalidConfig("storey bin height must be positive".into()));
    }
    let z: Vec<f64> = cloud.points.iter().map(|p| p.z).collect();
    let peaks = density_peaks(&z, params.bin_height, params.peak_min_fraction);
    if peaks.len() < 2 {
        return Err(Error::NoStoreyFound { peaks: peaks.len() });
    }
    let storeys = pair_peaks(&peaks, params.min_storey_height);
    if storeys.is_empty() {
        return Err(Error::NoStoreyFound { peaks: peaks.len() });
    }
    Ok(storeys)
}

/// Vertical range `[lower, upper)` of points belonging to each storey.
///
/// Neighbouring storeys split at the midpoint between the lower ceiling and
/// the upper floor; the outermost ranges are unbounded.
pub fn storey_bounds(storeys: &[StoreyInterval]) -> Vec<(f64, f64)> {
    (0..storeys.len())
        .map(|i| {
            let lower = if i == 0 {
                f64::NEG_INFINITY
            } else {
                0.5 * (storeys[i - 1].ceiling_z + storeys[i].floor_z)
            };
            let upper = if i + 1 == storeys.len() {
                f64::INFINITY
            } else {
                0.5 * (storeys[i].ceiling_z + storeys[i + 1].floor_z)
            };
            (lower, upper)
        })
        .collect()
}

/// Storey ordinal of every point.
pub fn assign_storeys(cloud: &LabeledPointCloud, storeys: &[StoreyInterval]) -> Vec<usize> {
    let bounds = storey_bounds(storeys);
    cloud
        .points
        .iter()
        .map(|p| {
            bounds
                .iter()
                .position(|&(_, hi)| p.z < hi)
                .unwrap_or(bounds.len().saturating_sub(1))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairing_skips_double_slab() {
        let s = pair_peaks(&[0.0, 2.7, 3.0, 5.7], 2.0);
        assert_eq!(s.len(), 2);
        assert_eq!((s[1].floor_z, s[1].ceiling_z), (3.0, 5.7));
    }

    #[test]
    fn trailing_peak_does_not_open_a_storey() {
        let s = pair_peaks(&[0.0, 2.7, 3.0], 2.0);
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].ceiling_z, 2.7);
    }

    #[test]
    fn close_peak_above_floor_is_ignored() {
        let s = pair_peaks(&[0.0, 0.8, 2.7], 2.0);
        assert_eq!(s.len(), 1);
        assert_eq!((s[0].floor_z, s[0].ceiling_z), (0.0, 2.7));
    }

    #[test]
    fn bounds_split_at_midpoints() {
        let s = pair_peaks(&[0.0, 2.7, 3.0, 5.7], 2.0);
        let b = storey_bounds(&s);
        assert_eq!(b[0].0, f64::NEG_INFINITY);
        assert!((b[0].1 - 2.85).abs() < 1e-12);
        assert_eq!(b[1], (b[0].1, f64::INFINITY));
    }
}

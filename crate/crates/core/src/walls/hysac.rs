//! Hypothesis-based sample consensus: plane extraction seeded from density
//! peaks of the point distribution across the wall.

use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{fit_plane_svd, Plane, Point2, Point3};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HysacConfig {
    pub n_bins: usize,
    pub n_seeds: usize,
    pub min_points: usize,
    pub distance_threshold: f64,
    pub min_inlier_ratio: f64,
    /// Hypotheses tried per extraction round before giving up.
    pub max_trials: usize,
}

impl Default for HysacConfig {
    fn default() -> Self {
        Self {
            n_bins: 50,
            n_seeds: 10,
            min_points: 100,
            distance_threshold: 0.05,
            min_inlier_ratio: 0.1,
            max_trials: 10,
        }
    }
}

impl HysacConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.to_string()));
        if self.n_seeds < 3 {
            return bad("hysac n_seeds must be at least 3");
        }
        if self.n_bins < 2 {
            return bad("hysac n_bins must be at least 2");
        }
        if self.min_points < self.n_seeds {
            return bad("hysac min_points must be at least n_seeds");
        }
        if !(self.distance_threshold > 0.0) {
            return bad("hysac distance threshold must be positive");
        }
        if !(self.min_inlier_ratio > 0.0 && self.min_inlier_ratio <= 1.0) {
            return bad("hysac min inlier ratio must lie in (0, 1]");
        }
        if self.max_trials == 0 {
            return bad("hysac max_trials must be at least 1");
        }
        Ok(())
    }
}

/// How seed points for a plane hypothesis are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SeedStrategy {
    /// From the densest bins of the histogram across the wall.
    Histogram,
    /// Uniformly from all remaining points (plain RANSAC).
    Uniform,
}

/// Histogram of `coords` with `n_bins` bins over their range.
struct Histogram {
    counts: Vec<usize>,
    bin_of: Vec<usize>,
}

impl Histogram {
    fn new(coords: &[f64], n_bins: usize) -> Self {
        let lo = coords.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = coords.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let width = if hi > lo { (hi - lo) / n_bins as f64 } else { 1.0 };
        let mut counts = vec![0; n_bins];
        let bin_of: Vec<usize> = coords
            .iter()
            .map(|&c| (((c - lo) / width) as usize).min(n_bins - 1))
            .collect();
        for &b in &bin_of {
            counts[b] += 1;
        }
        Self { counts, bin_of }
    }

    /// Local maxima above mean + one standard deviation, densest first.
    /// Falls back to the single densest bin.
    fn peaks(&self) -> Vec<usize> {
        let n = self.counts.len();
        let mean = self.counts.iter().sum::<usize>() as f64 / n as f64;
        let var = self
            .counts
            .iter()
            .map(|&c| (c as f64 - mean).powi(2))
            .sum::<f64>()
            / n as f64;
        let threshold = mean + var.sqrt();
        let mut peaks: Vec<usize> = (0..n)
            .filter(|&i| {
                let c = self.counts[i];
                let left = if i > 0 { self.counts[i - 1] } else { 0 };
                let right = if i + 1 < n { self.counts[i + 1] } else { 0 };
                c as f64 > threshold && c >= left && c > right
            })
            .collect();
        if peaks.is_empty() {
            if let Some(best) = (0..n).max_by(|&a, &b| self.counts[a].cmp(&self.counts[b]).then(b.cmp(&a))) {
                peaks.push(best);
            }
        }
        peaks.sort_by(|&a, &b| self.counts[b].cmp(&self.counts[a]).then(a.cmp(&b)));
        peaks
    }
}

/// Extracts planes from one wall cluster.
///
/// Each round histograms the remaining points along `across` (horizontal,
/// orthogonal to the wall surfaces), draws `n_seeds` seeds from the densest
/// peak, fits a plane by SVD, gathers inliers within the distance threshold,
/// refits once on them and re-gathers. A hypothesis is accepted when it has at
/// least `min_points` inliers making up at least `min_inlier_ratio` of the
/// remaining points; its inliers are then removed. Up to `max_trials`
/// hypotheses are tried per round, cycling through the peaks; the loop ends
/// when fewer than `min_points` points remain or a round accepts nothing.
///
/// Inlier indices of the returned planes refer to `points` and are disjoint.
pub fn hysac_planes<R: Rng + ?Sized>(
    points: &[Point3],
    config: &HysacConfig,
    across: Point2,
    strategy: SeedStrategy,
    rng: &mut R,
) -> Vec<Plane> {
    let mut remaining: Vec<usize> = (0..points.len()).collect();
    let mut planes = Vec::new();
    while remaining.len() >= config.min_points.max(3) {
        let coords: Vec<f64> = remaining
            .iter()
            .map(|&i| points[i].x * across.x + points[i].y * across.y)
            .collect();
        let hist = Histogram::new(&coords, config.n_bins.max(2));
        let peaks = match strategy {
            SeedStrategy::Histogram => hist.peaks(),
            SeedStrategy::Uniform => Vec::new(),
        };

        let mut accepted: Option<(Plane, Vec<usize>)> = None;
        for trial in 0..config.max_trials.max(1) {
            let seeds: Vec<usize> = match strategy {
                SeedStrategy::Histogram => {
                    let peak = peaks[trial % peaks.len()];
                    seeds_from_bin(&hist, peak, config.n_seeds, rng)
                }
                SeedStrategy::Uniform => {
                    let k = config.n_seeds.min(remaining.len());
                    sample(rng, remaining.len(), k).into_vec()
                }
            };
            if let Some(found) = evaluate_hypothesis(points, &remaining, &seeds, config) {
                accepted = Some(found);
                break;
            }
        }

        let Some((mut plane, inliers)) = accepted else {
            break;
        };
        let mut is_inlier = vec![false; points.len()];
        for &i in &inliers {
            is_inlier[i] = true;
        }
        remaining.retain(|&i| !is_inlier[i]);
        plane.inlier_indices = inliers;
        planes.push(plane);
    }
    planes
}

/// Positions (into the remaining list) of `n` random points from `bin`,
/// widening the window symmetrically until it holds enough points.
fn seeds_from_bin<R: Rng + ?Sized>(hist: &Histogram, bin: usize, n: usize, rng: &mut R) -> Vec<usize> {
    let n_bins = hist.counts.len();
    let mut radius = 0usize;
    loop {
        let lo = bin.saturating_sub(radius);
        let hi = (bin + radius).min(n_bins - 1);
        let total: usize = hist.counts[lo..=hi].iter().sum();
        if total >= n || (lo == 0 && hi == n_bins - 1) {
            let pool: Vec<usize> = hist
                .bin_of
                .iter()
                .enumerate()
                .filter(|(_, &b)| b >= lo && b <= hi)
                .map(|(pos, _)| pos)
                .collect();
            let k = n.min(pool.len());
            return sample(rng, pool.len(), k).into_iter().map(|j| pool[j]).collect();
        }
        radius += 1;
    }
}

/// Fits, refits and scores a hypothesis; `seeds` index into `remaining`.
fn evaluate_hypothesis(
    points: &[Point3],
    remaining: &[usize],
    seeds: &[usize],
    config: &HysacConfig,
) -> Option<(Plane, Vec<usize>)> {
    let seed_points: Vec<Point3> = seeds.iter().map(|&s| points[remaining[s]]).collect();
    let plane = fit_plane_svd(&seed_points).ok()?;
    let inliers = gather_inliers(points, remaining, &plane, config.distance_threshold);
    let (plane, inliers) = if inliers.len() >= 3 {
        let inlier_points: Vec<Point3> = inliers.iter().map(|&i| points[i]).collect();
        match fit_plane_svd(&inlier_points) {
            Ok(refit) => {
                let refit_inliers = gather_inliers(points, remaining, &refit, config.distance_threshold);
                (refit, refit_inliers)
            }
            Err(_) => (plane, inliers),
        }
    } else {
        (plane, inliers)
    };
    let ratio = inliers.len() as f64 / remaining.len() as f64;
    (inliers.len() >= config.min_points && ratio >= config.min_inlier_ratio).then_some((plane, inliers))
}

fn gather_inliers(points: &[Point3], remaining: &[usize], plane: &Plane, threshold: f64) -> Vec<usize> {
    remaining
        .iter()
        .copied()
        .filter(|&i| plane.distance(&points[i]) <= threshold)
        .collect()
}

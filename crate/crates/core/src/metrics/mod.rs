//! Pore-structure statistics used to validate reconstructions.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::edt::euclidean_distance_transform;
use crate::error::{Error, Result};
use crate::label::label_components;
use crate::volume::{BinaryVolume, Connectivity, PORE};

mod compare;
mod report;

pub use compare::{compare, resample_s2, Comparison, DeltaRow};
pub use report::{compute_report, MetricsReport, MetricsSettings, S2Point};

/// Recorded in every report next to the S2 curve.
pub const S2_ESTIMATOR: &str = "axis-aligned, in-domain pairs, mean of x/y/z";
/// Recorded in every report next to the radius histogram.
pub const RADIUS_APPROXIMATION: &str = "EDT";

pub fn porosity(volume: &BinaryVolume) -> f64 {
    volume.pore_count() as f64 / volume.len() as f64
}

/// Pore-pore pair counts and pair totals along one axis, per lag `0..=max_lag`.
fn axis_pairs(volume: &BinaryVolume, axis: usize, max_lag: usize) -> Vec<(u64, u64)> {
    let [nx, ny, nz] = volume.dims();
    let d = volume.data();
    (0..=max_lag)
        .map(|r| {
            let mut both = 0u64;
            match axis {
                0 => {
                    for row in d.chunks_exact(nx) {
                        both += row[..nx - r]
                            .iter()
                            .zip(&row[r..])
                            .filter(|(a, b)| **a & **b == PORE)
                            .count() as u64;
                    }
                }
                1 => {
                    let span = (ny - r) * nx;
                    for slab in d.chunks_exact(nx * ny) {
                        both += slab[..span]
                            .iter()
                            .zip(&slab[r * nx..])
                            .filter(|(a, b)| **a & **b == PORE)
                            .count() as u64;
                    }
                }
                _ => {
                    let span = (nz - r) * nx * ny;
                    both += d[..span]
                        .iter()
                        .zip(&d[r * nx * ny..])
                        .filter(|(a, b)| **a & **b == PORE)
                        .count() as u64;
                }
            }
            let pairs = match axis {
                0 => (nx - r) * ny * nz,
                1 => nx * (ny - r) * nz,
                _ => nx * ny * (nz - r),
            } as u64;
            (both, pairs)
        })
        .collect()
}

/// Axis-aligned two-point correlation for lags `0..=max_lag` voxels.
///
/// For each axis, `S2(r)` is the fraction of in-domain voxel pairs `r` apart
/// along that axis with both voxels pore (no periodic wrap); the result is
/// the mean of the three axis estimates.
pub fn two_point_correlation(volume: &BinaryVolume, max_lag: usize) -> Result<Vec<f64>> {
    let min_dim = volume.dims().into_iter().min().unwrap_or(0);
    if max_lag >= min_dim {
        return Err(Error::InvalidInput(format!(
            "max_lag {max_lag} must be below the smallest dimension {min_dim}"
        )));
    }
    let per_axis: Vec<Vec<(u64, u64)>> = (0..3).map(|a| axis_pairs(volume, a, max_lag)).collect();
    Ok((0..=max_lag)
        .map(|r| {
            if r == 0 {
                // coincident points; avoids rounding in the three-way mean
                return porosity(volume);
            }
            let sum: f64 = per_axis
                .iter()
                .map(|ax| ax[r].0 as f64 / ax[r].1 as f64)
                .sum();
            sum / 3.0
        })
        .collect())
}

/// Smallest lag with `S2(r) <= p² + 0.05 (p - p²)`, if the curve gets there.
pub fn decorrelation_lag(s2: &[f64], porosity: f64) -> Option<usize> {
    let p = porosity;
    let cut = p * p + 0.05 * (p - p * p);
    // tolerate rounding in the mean of the axis ratios
    s2.iter().position(|&v| v <= cut + 1e-12)
}

/// Component size (voxels) to number of components of that size.
pub fn cc_size_histogram(
    volume: &BinaryVolume,
    connectivity: Connectivity,
) -> BTreeMap<usize, usize> {
    let mut hist = BTreeMap::new();
    for size in label_components(volume, connectivity).sizes() {
        *hist.entry(size).or_insert(0) += 1;
    }
    hist
}

/// Covering radius of each pore component in µm: the largest EDT value inside
/// the component times the voxel size. Indexed by `label - 1`.
pub fn component_radii(volume: &BinaryVolume, connectivity: Connectivity) -> Vec<f64> {
    let labels = label_components(volume, connectivity);
    let edt = euclidean_distance_transform(volume);
    let mut max_sq = vec![0u64; labels.count()];
    for (&l, &d) in labels.labels().iter().zip(edt.squared()) {
        if l > 0 {
            let m = &mut max_sq[l as usize - 1];
            *m = (*m).max(d);
        }
    }
    max_sq
        .into_iter()
        .map(|d| (d as f64).sqrt() * volume.scale())
        .collect()
}

/// Histogram of component radii over ascending µm bin edges.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadiusHistogram {
    pub edges_um: Vec<f64>,
    /// `counts[i]` covers `[edges[i], edges[i+1])`; radii below the first edge
    /// land in the first bin, radii at or above the last edge in the last.
    pub counts: Vec<usize>,
    pub approximation: String,
}

impl RadiusHistogram {
    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }
}

pub fn validate_edges(edges: &[f64]) -> Result<()> {
    if edges.len() < 2
        || edges.windows(2).any(|w| !(w[0] < w[1]))
        || edges.iter().any(|e| !e.is_finite())
    {
        return Err(Error::InvalidInput(
            "radius bins need at least two strictly increasing finite edges".into(),
        ));
    }
    Ok(())
}

pub fn bin_radii(radii: &[f64], edges: &[f64]) -> Result<RadiusHistogram> {
    validate_edges(edges)?;
    let bins = edges.len() - 1;
    let mut counts = vec![0usize; bins];
    for &r in radii {
        // number of interior edges <= r
        let i = edges[1..bins].partition_point(|&e| e <= r);
        counts[i] += 1;
    }
    Ok(RadiusHistogram {
        edges_um: edges.to_vec(),
        counts,
        approximation: RADIUS_APPROXIMATION.to_string(),
    })
}

pub fn pore_radius_histogram(
    volume: &BinaryVolume,
    edges_um: &[f64],
    connectivity: Connectivity,
) -> Result<RadiusHistogram> {
    bin_radii(&component_radii(volume, connectivity), edges_um)
}

/// Components whose covering radius is strictly below `threshold_um`.
pub fn micropore_count(
    volume: &BinaryVolume,
    threshold_um: f64,
    connectivity: Connectivity,
) -> usize {
    component_radii(volume, connectivity)
        .into_iter()
        .filter(|&r| r < threshold_um)
        .count()
}

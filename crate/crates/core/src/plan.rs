//! Length-scale bookkeeping: fields of view, stage counts, output resolution,
//! micro-pore size range and padding multiplicity.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::volume::{voxel_count, BinaryVolume};

/// Edge length of the pattern template, in voxels.
pub const TEMPLATE_SIZE: usize = 5;

/// Relative tolerance for scale comparisons, so exact power-of-two ratios
/// survive decimal round trips.
pub const SCALE_TOLERANCE: f64 = 1e-9;

/// Physical extent of `size` voxels of edge `scale` µm.
pub fn fov(scale: f64, size: usize) -> Result<f64> {
    if !(scale.is_finite() && scale > 0.0) || size == 0 {
        return Err(Error::InvalidInput(format!(
            "fov needs positive scale and size, got ({scale}, {size})"
        )));
    }
    Ok(scale * size as f64)
}

/// Largest `k` with `2^k <= ratio` (within tolerance).
fn floor_log2(ratio: f64) -> u32 {
    let mut k = 0u32;
    while 2f64.powi(k as i32 + 1) <= ratio * (1.0 + SCALE_TOLERANCE) {
        k += 1;
    }
    k
}

/// Ceiling that treats values within tolerance of an integer as that integer.
fn ceil_tolerant(x: f64) -> usize {
    let r = x.round();
    if (x - r).abs() <= SCALE_TOLERANCE * x.abs().max(1.0) {
        r as usize
    } else {
        x.ceil() as usize
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StagePlan {
    /// 1-based stage number.
    pub stage: usize,
    pub input_scale_um: f64,
    pub output_scale_um: f64,
    /// Level of the edge-pattern dictionary consumed by this stage.
    pub dictionary_level: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalePlan {
    pub lr_scale_um: f64,
    pub hr_scale_um: f64,
    pub lr_size: usize,
    pub hr_size: usize,
    pub template_size: usize,
    /// Upsampling stages allowed by the scale ratio alone.
    pub n_max: u32,
    /// Dictionary levels (and stages actually run).
    pub m_max: u32,
    /// `n_max - m_max`: stages lost to a too-small HR volume.
    pub stage_shortfall: u32,
    pub stages: Vec<StagePlan>,
    pub output_scale_um: f64,
    /// Inclusive voxel-count bounds for micro-pore components of the HR volume.
    pub cc_range: [usize; 2],
    pub pad_multiplicity: usize,
}

impl ScalePlan {
    pub fn cc_contains(&self, voxels: usize) -> bool {
        (self.cc_range[0]..=self.cc_range[1]).contains(&voxels)
    }

    /// Per-axis voxel count after all stages, for an `n`-voxel LR axis.
    pub fn output_size(&self, n: usize) -> usize {
        (n - 1) * (1usize << self.m_max) + 1
    }
}

/// Plans a reconstruction from LR/HR scales (µm) and per-axis sizes (voxels).
pub fn plan(
    lr_scale: f64,
    hr_scale: f64,
    lr_size: usize,
    hr_size: usize,
    template_size: usize,
) -> Result<ScalePlan> {
    plan_inner(lr_scale, hr_scale, lr_size, hr_size, hr_size, template_size)
}

/// Plans from two volumes. Per-axis sizes are the cube root of the voxel
/// count; the template constraint uses the smallest HR axis and the padding
/// multiplicity uses the full FoV volume ratio.
pub fn plan_for_volumes(lr: &BinaryVolume, hr: &BinaryVolume) -> Result<ScalePlan> {
    let side = |v: &BinaryVolume| (voxel_count(v.dims()) as f64).cbrt().round() as usize;
    let hr_min = hr.dims().into_iter().min().unwrap_or(0);
    let mut p = plan_inner(
        lr.scale(),
        hr.scale(),
        side(lr),
        side(hr),
        hr_min,
        TEMPLATE_SIZE,
    )?;
    let lr_fov: f64 = lr.fov().iter().product();
    let hr_fov: f64 = hr.fov().iter().product();
    p.pad_multiplicity = ((lr_fov / hr_fov).round() as usize).max(1);
    Ok(p)
}

fn plan_inner(
    lr_scale: f64,
    hr_scale: f64,
    lr_size: usize,
    hr_size: usize,
    hr_min_axis: usize,
    template_size: usize,
) -> Result<ScalePlan> {
    fov(lr_scale, lr_size)?;
    fov(hr_scale, hr_size)?;
    if template_size == 0 {
        return Err(Error::InvalidInput("template size must be positive".into()));
    }
    if lr_scale < hr_scale * (1.0 - SCALE_TOLERANCE) {
        return Err(Error::NothingToReconstruct(format!(
            "LR scale {lr_scale} µm is finer than HR scale {hr_scale} µm"
        )));
    }
    let ratio = lr_scale / hr_scale;
    let n_max = floor_log2(ratio);
    if n_max == 0 {
        return Err(Error::NothingToReconstruct(format!(
            "LR/HR scale ratio {ratio:.4} admits no upsampling stage"
        )));
    }
    let mut m_size = 0u32;
    while hr_min_axis >= template_size << (m_size + 1) {
        m_size += 1;
    }
    let m_max = n_max.min(m_size);
    if m_max == 0 {
        return Err(Error::TooSmall(format!(
            "HR size {hr_min_axis} gives no dictionary level for template {template_size}"
        )));
    }
    if m_max < n_max {
        log::warn!("HR volume supports {m_max} dictionary levels; scale ratio allows {n_max}");
    }

    let output_scale = lr_scale / f64::from(1u32 << m_max);
    let stages = (1..=m_max as usize)
        .map(|k| StagePlan {
            stage: k,
            input_scale_um: lr_scale / (1u64 << (k - 1)) as f64,
            output_scale_um: lr_scale / (1u64 << k) as f64,
            dictionary_level: m_max - k as u32 + 1,
        })
        .collect();
    let lo = ceil_tolerant(output_scale / hr_scale).pow(3);
    let hi = ceil_tolerant(ratio).pow(3);
    let fov_ratio = (lr_scale * lr_size as f64) / (hr_scale * hr_size as f64);
    let pad_multiplicity = (fov_ratio.powi(3).round() as usize).max(1);

    Ok(ScalePlan {
        lr_scale_um: lr_scale,
        hr_scale_um: hr_scale,
        lr_size,
        hr_size,
        template_size,
        n_max,
        m_max,
        stage_shortfall: n_max - m_max,
        stages,
        output_scale_um: output_scale,
        cc_range: [lo.max(1), hi],
        pad_multiplicity,
    })
}

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::dictionary::{EdgePatternDictionary, SkeletonCode};
use crate::error::{Error, Result};
use crate::reconstruct::grid::{block_origins, phi_upsample};
use crate::reconstruct::matching::{match_skeleton, select_edge_fill, TieBreaker};
use crate::reconstruct::ReconstructionConfig;
use crate::volume::{BinaryVolume, Dims};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageReport {
    pub stage: usize,
    pub dictionary_level: u32,
    pub input_dims: Dims,
    pub output_dims: Dims,
    pub output_scale_um: f64,
    pub blocks: usize,
    /// Blocks whose skeleton code was found verbatim in the dictionary.
    pub exact_matches: usize,
    pub exact_match_rate: f64,
    pub mean_skeleton_distance: f64,
    /// Blocks where several skeleton classes tied.
    pub skeleton_ties: usize,
    /// Blocks where several edge fills tied.
    pub fill_ties: usize,
}

/// One refinement stage with a fresh tie-breaker seeded from `cfg.seed`.
pub fn reconstruct_stage(
    volume: &BinaryVolume,
    epd: &EdgePatternDictionary,
    cfg: &ReconstructionConfig,
) -> Result<(BinaryVolume, StageReport)> {
    let mut tie = TieBreaker::new(cfg.tie_break, cfg.seed);
    reconstruct_stage_with(volume, epd, &mut tie)
}

/// Upsamples `volume` and fills every pending voxel from `epd`.
///
/// Blocks are 3³ input windows at origins `0, 2, 4, …` (last clamped) in
/// raster order. Each block picks its nearest skeleton class, then the class
/// fill with the fewest disagreements against pending voxels committed by
/// earlier blocks, and commits that fill to the voxels still unset. Skeleton
/// voxels and committed voxels are never rewritten.
pub fn reconstruct_stage_with(
    volume: &BinaryVolume,
    epd: &EdgePatternDictionary,
    tie: &mut TieBreaker,
) -> Result<(BinaryVolume, StageReport)> {
    if epd.is_empty() {
        return Err(Error::EmptyDictionary);
    }
    let mut grid = phi_upsample(volume)?;
    let offsets = grid.pending_offsets();
    let in_dims = volume.dims();
    let origins = in_dims.map(block_origins);
    let data = volume.data();

    let mut blocks = 0usize;
    let mut exact = 0usize;
    let mut distance_sum = 0u64;
    let mut skeleton_ties = 0usize;
    let mut fill_ties = 0usize;
    let mut lattice = [0u8; 27];

    for &oz in &origins[2] {
        for &oy in &origins[1] {
            for &ox in &origins[0] {
                for dz in 0..3 {
                    for dy in 0..3 {
                        let row = volume.index(ox, oy + dy, oz + dz);
                        lattice[9 * dz + 3 * dy..9 * dz + 3 * dy + 3]
                            .copy_from_slice(&data[row..row + 3]);
                    }
                }
                let code = SkeletonCode::from_lattice(&lattice);
                let m = match_skeleton(code, epd, tie)?;
                let base = grid.block_base([2 * ox, 2 * oy, 2 * oz]);
                let ctx = grid.context(base, &offsets);
                let fills = epd.fills(m.class);
                let choice = select_edge_fill(fills, &ctx, tie)?;
                grid.commit(base, &offsets, fills[choice.index]);

                blocks += 1;
                exact += (m.distance == 0) as usize;
                distance_sum += m.distance as u64;
                skeleton_ties += (m.candidates > 1) as usize;
                fill_ties += (choice.candidates > 1) as usize;
            }
        }
    }

    let output = grid.into_volume()?;
    let report = StageReport {
        stage: 1,
        dictionary_level: epd.level(),
        input_dims: in_dims,
        output_dims: output.dims(),
        output_scale_um: output.scale(),
        blocks,
        exact_matches: exact,
        exact_match_rate: exact as f64 / blocks as f64,
        mean_skeleton_distance: distance_sum as f64 / blocks as f64,
        skeleton_ties,
        fill_ties,
    };
    Ok((output, report))
}

/// Result of the staged edge reconstruction.
#[derive(Debug, Clone)]
pub struct Reconstruction {
    /// Partial multiscale structures after each stage, first to last.
    pub stages: Vec<BinaryVolume>,
    pub reports: Vec<StageReport>,
    /// Wall-clock seconds per stage.
    pub stage_seconds: Vec<f64>,
}

impl Reconstruction {
    pub fn final_volume(&self) -> &BinaryVolume {
        self.stages.last().expect("at least one stage")
    }

    pub fn into_final(mut self) -> BinaryVolume {
        self.stages.pop().expect("at least one stage")
    }
}

pub fn reconstruct_multistage(
    lri: &BinaryVolume,
    dicts: &[EdgePatternDictionary],
    cfg: &ReconstructionConfig,
) -> Result<Reconstruction> {
    let mut tie = TieBreaker::new(cfg.tie_break, cfg.seed);
    reconstruct_multistage_with(lri, dicts, cfg.single_epd_baseline, &mut tie)
}

/// Runs one stage per dictionary. `dicts` must be ordered coarsest first
/// (levels strictly decreasing). With `single_epd`, every stage uses the
/// level-1 dictionary instead.
pub fn reconstruct_multistage_with(
    lri: &BinaryVolume,
    dicts: &[EdgePatternDictionary],
    single_epd: bool,
    tie: &mut TieBreaker,
) -> Result<Reconstruction> {
    if dicts.is_empty() {
        return Err(Error::EmptyDictionary);
    }
    if dicts.windows(2).any(|w| w[0].level() <= w[1].level()) {
        return Err(Error::InvalidInput(
            "dictionaries must be ordered coarsest level first".into(),
        ));
    }
    let native = dicts.iter().find(|d| d.level() == 1);
    if single_epd && native.is_none() {
        return Err(Error::InvalidInput(
            "single-dictionary baseline needs the level-1 dictionary".into(),
        ));
    }

    let mut stages: Vec<BinaryVolume> = Vec::with_capacity(dicts.len());
    let mut reports = Vec::with_capacity(dicts.len());
    let mut seconds = Vec::with_capacity(dicts.len());
    for (k, dict) in dicts.iter().enumerate() {
        let epd = if single_epd { native.unwrap() } else { dict };
        let input = stages.last().unwrap_or(lri);
        let t0 = Instant::now();
        let (out, mut report) = reconstruct_stage_with(input, epd, tie)?;
        seconds.push(t0.elapsed().as_secs_f64());
        report.stage = k + 1;
        log::info!(
            "stage {} (level {}): {:?} -> {:?}, exact-match rate {:.3}",
            report.stage,
            report.dictionary_level,
            report.input_dims,
            report.output_dims,
            report.exact_match_rate
        );
        stages.push(out);
        reports.push(report);
    }
    Ok(Reconstruction {
        stages,
        reports,
        stage_seconds: seconds,
    })
}

//! Random, mask-guarded placement of micro-pore elements.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dictionary::MicroPoreDictionary;
use crate::error::{Error, Result};
use crate::morphology::dilate;
use crate::plan::ScalePlan;
use crate::reconstruct::{stream_rng, ReconstructionConfig, PADDING_STREAM};
use crate::volume::{linear_index, BinaryVolume, PORE};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Placement {
    pub element: usize,
    pub copy: usize,
    /// Grid position of the element's bounding-box min corner.
    pub anchor: [usize; 3],
    pub attempts: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PaddingReport {
    pub multiplicity: usize,
    pub requested: usize,
    pub placed: usize,
    pub skipped: usize,
    pub added_voxels: usize,
    pub placements: Vec<Placement>,
}

pub fn pad_micropores(
    pms: &BinaryVolume,
    mpd: &MicroPoreDictionary,
    plan: &ScalePlan,
    cfg: &ReconstructionConfig,
) -> Result<(BinaryVolume, PaddingReport)> {
    let mut rng = stream_rng(cfg.seed, PADDING_STREAM);
    pad_micropores_with(pms, mpd, plan, cfg, &mut rng)
}

/// Places each dictionary element `plan.pad_multiplicity` times.
///
/// The forbidden mask starts as the pore phase of `pms` dilated by
/// `cfg.dilation_radius`. A copy is tried at uniformly drawn anchors that
/// keep its bounding box inside the domain; it lands on the first anchor
/// where none of its pore voxels hit the mask, after which its own footprint,
/// dilated by the same radius, joins the mask. Copies that find no legal
/// anchor within `cfg.max_placement_attempts` draws are skipped. Elements
/// whose box exceeds the domain are skipped without drawing.
pub fn pad_micropores_with<R: Rng>(
    pms: &BinaryVolume,
    mpd: &MicroPoreDictionary,
    plan: &ScalePlan,
    cfg: &ReconstructionConfig,
    rng: &mut R,
) -> Result<(BinaryVolume, PaddingReport)> {
    cfg.validate()?;
    if let Some(e) = mpd
        .elements()
        .iter()
        .find(|e| !plan.cc_contains(e.voxel_count()))
    {
        return Err(Error::InvalidInput(format!(
            "micro-pore element of {} voxels outside range {:?}",
            e.voxel_count(),
            plan.cc_range
        )));
    }
    let dims = pms.dims();
    let r = cfg.dilation_radius;
    let mut blocked = dilate(pms, r).into_data();
    let mut data = pms.data().to_vec();
    let multiplicity = plan.pad_multiplicity;
    let mut report = PaddingReport {
        multiplicity,
        requested: mpd.len() * multiplicity,
        placed: 0,
        skipped: 0,
        added_voxels: 0,
        placements: Vec::new(),
    };

    for (ei, element) in mpd.elements().iter().enumerate() {
        let edims = element.dims();
        let offsets: Vec<[usize; 3]> = element.offsets().collect();
        let fits = (0..3).all(|a| edims[a] <= dims[a]);
        for copy in 0..multiplicity {
            if !fits {
                report.skipped += 1;
                continue;
            }
            let mut placed = None;
            for attempt in 1..=cfg.max_placement_attempts {
                let anchor = [
                    rng.gen_range(0..=dims[0] - edims[0]),
                    rng.gen_range(0..=dims[1] - edims[1]),
                    rng.gen_range(0..=dims[2] - edims[2]),
                ];
                let clear = offsets.iter().all(|o| {
                    blocked
                        [linear_index(dims, anchor[0] + o[0], anchor[1] + o[1], anchor[2] + o[2])]
                        == 0
                });
                if clear {
                    placed = Some((anchor, attempt));
                    break;
                }
            }
            let Some((anchor, attempts)) = placed else {
                report.skipped += 1;
                continue;
            };
            for o in &offsets {
                let p = [anchor[0] + o[0], anchor[1] + o[1], anchor[2] + o[2]];
                data[linear_index(dims, p[0], p[1], p[2])] = PORE;
                let lo = p.map(|c| c.saturating_sub(r));
                let hi = [0, 1, 2].map(|a| (p[a] + r).min(dims[a] - 1));
                for z in lo[2]..=hi[2] {
                    for y in lo[1]..=hi[1] {
                        let row = linear_index(dims, 0, y, z);
                        blocked[row + lo[0]..=row + hi[0]].fill(1);
                    }
                }
            }
            report.placed += 1;
            report.added_voxels += offsets.len();
            report.placements.push(Placement {
                element: ei,
                copy,
                anchor,
                attempts,
            });
        }
    }
    if report.skipped > 0 {
        log::warn!(
            "micro-pore padding skipped {} of {} copies",
            report.skipped,
            report.requested
        );
    }
    Ok((
        BinaryVolume::from_parts_unchecked(dims, pms.scale(), data),
        report,
    ))
}

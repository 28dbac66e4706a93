use crate::dictionary::codes::BLOCK;
use crate::dictionary::epd::window_offsets;
use crate::dictionary::EdgeFill;
use crate::error::{Error, Result};
use crate::reconstruct::matching::BlockContext;
use crate::volume::{linear_index, voxel_count, BinaryVolume, Dims, PORE, ROCK};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum VoxelState {
    SkeletonRock,
    SkeletonPore,
    PendingUnset,
    PendingRock,
    PendingPore,
}

impl VoxelState {
    pub fn is_skeleton(self) -> bool {
        matches!(self, VoxelState::SkeletonRock | VoxelState::SkeletonPore)
    }

    /// Phase value once decided.
    pub fn value(self) -> Option<u8> {
        match self {
            VoxelState::SkeletonRock | VoxelState::PendingRock => Some(ROCK),
            VoxelState::SkeletonPore | VoxelState::PendingPore => Some(PORE),
            VoxelState::PendingUnset => None,
        }
    }
}

/// Interleaved grid: an `n`-voxel axis becomes `2n - 1` voxels, the input
/// sitting at even coordinates (the skeleton) and every other voxel pending.
#[derive(Debug, Clone, PartialEq)]
pub struct PseudoHRGrid {
    dims: Dims,
    scale: f64,
    states: Vec<VoxelState>,
}

/// Upsampling map: places `volume` on the skeleton of a pseudo-HR grid at half its scale.
pub fn phi_upsample(volume: &BinaryVolume) -> Result<PseudoHRGrid> {
    let [nx, ny, nz] = volume.dims();
    if nx.min(ny).min(nz) < 3 {
        return Err(Error::TooSmall(format!(
            "upsampling needs ≥ 3 voxels per axis, got {:?}",
            volume.dims()
        )));
    }
    let dims = [2 * nx - 1, 2 * ny - 1, 2 * nz - 1];
    let mut states = vec![VoxelState::PendingUnset; voxel_count(dims)];
    for z in 0..nz {
        for y in 0..ny {
            for x in 0..nx {
                states[linear_index(dims, 2 * x, 2 * y, 2 * z)] = if volume.is_pore(x, y, z) {
                    VoxelState::SkeletonPore
                } else {
                    VoxelState::SkeletonRock
                };
            }
        }
    }
    Ok(PseudoHRGrid {
        dims,
        scale: volume.scale() / 2.0,
        states,
    })
}

/// Block origins along an axis of `n` input voxels: `0, 2, 4, …`, with the
/// last origin clamped to `n - 3`.
pub fn block_origins(n: usize) -> Vec<usize> {
    debug_assert!(n >= 3);
    let last = n - 3;
    let mut v: Vec<usize> = (0..=last).step_by(2).collect();
    if v.last() != Some(&last) {
        v.push(last);
    }
    v
}

impl PseudoHRGrid {
    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn states(&self) -> &[VoxelState] {
        &self.states
    }

    pub fn state(&self, x: usize, y: usize, z: usize) -> VoxelState {
        self.states[linear_index(self.dims, x, y, z)]
    }

    pub fn pending_unset(&self) -> usize {
        self.states
            .iter()
            .filter(|&&s| s == VoxelState::PendingUnset)
            .count()
    }

    pub(crate) fn pending_offsets(&self) -> [usize; 98] {
        window_offsets(self.dims, 1).1
    }

    /// Committed pending voxels of the 5³ block at grid index `base`.
    pub(crate) fn context(&self, base: usize, offsets: &[usize; 98]) -> BlockContext {
        let mut mask = 0u128;
        let mut values = 0u128;
        for (k, &o) in offsets.iter().enumerate() {
            match self.states[base + o] {
                VoxelState::PendingRock => mask |= 1 << k,
                VoxelState::PendingPore => {
                    mask |= 1 << k;
                    values |= 1 << k;
                }
                _ => {}
            }
        }
        BlockContext::new(mask, values)
    }

    /// Writes `fill` into the still-unset pending voxels of the block; returns how many.
    pub(crate) fn commit(&mut self, base: usize, offsets: &[usize; 98], fill: EdgeFill) -> usize {
        let mut written = 0;
        for (k, &o) in offsets.iter().enumerate() {
            let s = &mut self.states[base + o];
            if *s == VoxelState::PendingUnset {
                *s = if fill.bit(k) == PORE {
                    VoxelState::PendingPore
                } else {
                    VoxelState::PendingRock
                };
                written += 1;
            }
        }
        written
    }

    pub(crate) fn block_base(&self, origin: [usize; 3]) -> usize {
        debug_assert!((0..3).all(|a| origin[a] + BLOCK <= self.dims[a]));
        linear_index(self.dims, origin[0], origin[1], origin[2])
    }

    /// Converts a fully committed grid to a volume.
    pub fn into_volume(self) -> Result<BinaryVolume> {
        let mut data = Vec::with_capacity(self.states.len());
        for s in &self.states {
            data.push(s.value().ok_or_else(|| {
                Error::InvalidInput("grid still has uncommitted pending voxels".into())
            })?);
        }
        BinaryVolume::new(self.dims, self.scale, data)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_cube_upsamples_to_five() {
        let v = BinaryVolume::filled([3, 3, 3], 2.0, PORE).unwrap();
        let g = phi_upsample(&v).unwrap();
        assert_eq!(g.dims(), [5, 5, 5]);
        assert_eq!(g.scale(), 1.0);
        let skel = g
            .states()
            .iter()
            .filter(|s| **s == VoxelState::SkeletonPore)
            .count();
        assert_eq!(skel, 27);
        assert_eq!(g.pending_unset(), 98);
        assert!(g.into_volume().is_err());
    }

    #[test]
    fn sixty_four_axis() {
        let v = BinaryVolume::filled([64, 3, 3], 9.4, ROCK).unwrap();
        assert_eq!(phi_upsample(&v).unwrap().dims(), [127, 5, 5]);
    }

    #[test]
    fn too_thin_rejected() {
        let v = BinaryVolume::filled([2, 5, 5], 1.0, ROCK).unwrap();
        assert!(matches!(phi_upsample(&v), Err(Error::TooSmall(_))));
    }

    #[test]
    fn origins_cover_axis() {
        assert_eq!(block_origins(3), vec![0]);
        assert_eq!(block_origins(9), vec![0, 2, 4, 6]);
        assert_eq!(block_origins(8), vec![0, 2, 4, 5]);
        assert_eq!(block_origins(4), vec![0, 1]);
    }

    #[test]
    fn commit_is_write_once() {
        let v = BinaryVolume::filled([3, 3, 3], 2.0, ROCK).unwrap();
        let mut g = phi_upsample(&v).unwrap();
        let offs = g.pending_offsets();
        assert_eq!(
            g.commit(0, &offs, EdgeFill::new(EdgeFill::MASK).unwrap()),
            98
        );
        assert_eq!(g.commit(0, &offs, EdgeFill::new(0).unwrap()), 0);
        let ctx = g.context(0, &offs);
        assert_eq!(ctx.mask(), EdgeFill::MASK);
        assert_eq!(ctx.values(), EdgeFill::MASK);
        let out = g.into_volume().unwrap();
        assert_eq!(out.pore_count(), 98);
    }
}

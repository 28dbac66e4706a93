//! Bit codes for 5³ edge patterns.
//!
//! A 5³ block splits into the 27 skeleton positions (all coordinates even)
//! and the 98 pending positions (at least one odd coordinate). Both sets are
//! enumerated in raster order, x fastest, and bit `k` of a code holds the
//! voxel at the `k`-th position of its set.

use crate::error::{Error, Result};

pub const BLOCK: usize = 5;
pub const BLOCK_VOXELS: usize = BLOCK * BLOCK * BLOCK;
pub const SKELETON_BITS: usize = 27;
pub const PENDING_BITS: usize = BLOCK_VOXELS - SKELETON_BITS;

const fn is_skeleton(local: usize) -> bool {
    let x = local % BLOCK;
    let y = (local / BLOCK) % BLOCK;
    let z = local / (BLOCK * BLOCK);
    x.is_multiple_of(2) && y.is_multiple_of(2) && z.is_multiple_of(2)
}

const fn positions<const N: usize>(skeleton: bool) -> [usize; N] {
    let mut out = [0usize; N];
    let mut k = 0;
    let mut local = 0;
    while local < BLOCK_VOXELS {
        if is_skeleton(local) == skeleton {
            out[k] = local;
            k += 1;
        }
        local += 1;
    }
    out
}

/// Local 5³ indices (`x + 5y + 25z`) of the skeleton positions, in bit order.
pub const SKELETON_POSITIONS: [usize; SKELETON_BITS] = positions::<SKELETON_BITS>(true);
/// Local 5³ indices of the pending positions, in bit order.
pub const PENDING_POSITIONS: [usize; PENDING_BITS] = positions::<PENDING_BITS>(false);

/// Local offsets `(x, y, z)` inside a 5³ block.
#[inline]
pub const fn local_coords(local: usize) -> [usize; 3] {
    [
        local % BLOCK,
        (local / BLOCK) % BLOCK,
        local / (BLOCK * BLOCK),
    ]
}

/// 27-bit code of a 3³ skeleton lattice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SkeletonCode(u32);

impl SkeletonCode {
    pub const MASK: u32 = (1 << SKELETON_BITS) - 1;

    pub fn new(bits: u32) -> Result<Self> {
        if bits & !Self::MASK != 0 {
            return Err(Error::InvalidInput(format!(
                "skeleton code {bits:#x} exceeds 27 bits"
            )));
        }
        Ok(SkeletonCode(bits))
    }

    pub fn bits(self) -> u32 {
        self.0
    }

    #[inline]
    pub fn hamming(self, other: SkeletonCode) -> u32 {
        (self.0 ^ other.0).count_ones()
    }

    /// Code of a 3³ block given in raster order (x fastest).
    pub fn from_lattice(values: &[u8; SKELETON_BITS]) -> Self {
        let mut bits = 0u32;
        for (k, &v) in values.iter().enumerate() {
            bits |= ((v & 1) as u32) << k;
        }
        SkeletonCode(bits)
    }
}

/// 98-bit assignment of the pending positions of a 5³ block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EdgeFill(u128);

impl EdgeFill {
    pub const MASK: u128 = (1 << PENDING_BITS) - 1;

    pub fn new(bits: u128) -> Result<Self> {
        if bits & !Self::MASK != 0 {
            return Err(Error::InvalidInput("edge fill exceeds 98 bits".into()));
        }
        Ok(EdgeFill(bits))
    }

    pub fn bits(self) -> u128 {
        self.0
    }

    #[inline]
    pub fn bit(self, k: usize) -> u8 {
        ((self.0 >> k) & 1) as u8
    }
}

fn check_block(block: &[u8]) -> Result<()> {
    if block.len() != BLOCK_VOXELS {
        return Err(Error::InvalidInput(format!(
            "expected a 5³ block of {BLOCK_VOXELS} voxels, got {}",
            block.len()
        )));
    }
    Ok(())
}

/// Reads the skeleton lattice (even coordinates) of a 5³ block.
pub fn extract_skeleton(block: &[u8]) -> Result<SkeletonCode> {
    check_block(block)?;
    let mut bits = 0u32;
    for (k, &p) in SKELETON_POSITIONS.iter().enumerate() {
        bits |= ((block[p] & 1) as u32) << k;
    }
    Ok(SkeletonCode(bits))
}

/// Reads the pending positions of a 5³ block.
pub fn extract_fill(block: &[u8]) -> Result<EdgeFill> {
    check_block(block)?;
    let mut bits = 0u128;
    for (k, &p) in PENDING_POSITIONS.iter().enumerate() {
        bits |= ((block[p] & 1) as u128) << k;
    }
    Ok(EdgeFill(bits))
}

/// Writes a skeleton code and an edge fill back into a 5³ block.
pub fn assemble(code: SkeletonCode, fill: EdgeFill) -> [u8; BLOCK_VOXELS] {
    let mut block = [0u8; BLOCK_VOXELS];
    for (k, &p) in SKELETON_POSITIONS.iter().enumerate() {
        block[p] = ((code.0 >> k) & 1) as u8;
    }
    for (k, &p) in PENDING_POSITIONS.iter().enumerate() {
        block[p] = fill.bit(k);
    }
    block
}

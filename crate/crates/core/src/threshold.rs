//! Otsu segmentation of grayscale volumes.

use crate::error::{Error, Result};
use crate::volume::{BinaryVolume, GrayVolume, PORE, ROCK};

/// Which side of the threshold is pore space.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Polarity {
    /// Intensities below the threshold are pore (usual for micro-CT).
    PoresDark,
    PoresBright,
}

impl Polarity {
    pub fn from_pores_are_dark(dark: bool) -> Self {
        if dark {
            Polarity::PoresDark
        } else {
            Polarity::PoresBright
        }
    }
}

/// Between-class variance of a split with `n0` voxels summing to `s0` below
/// and `n1`, `s1` at or above the threshold, up to the constant `1/N²`, kept
/// as the exact fraction `(s0*n1 - s1*n0)² / (n0*n1)`.
///
/// The numerator is invariant under intensity shifts, since a shift by `c`
/// adds `c*n0*n1` to both products.
#[derive(Debug, Clone, Copy)]
pub(crate) struct SplitScore {
    /// `|s0*n1 - s1*n0|`
    gap: u128,
    /// `n0*n1`
    weight: u128,
}

impl SplitScore {
    pub(crate) fn new(n0: u64, s0: u128, n1: u64, s1: u128) -> Self {
        let a = s0 * n1 as u128;
        let b = s1 * n0 as u128;
        SplitScore {
            gap: a.abs_diff(b),
            weight: n0 as u128 * n1 as u128,
        }
    }

    /// Strict comparison of the two fractions; exact unless a squared gap
    /// overflows 128 bits, in which case f64 is used.
    pub(crate) fn beats(self, other: SplitScore) -> bool {
        match (
            self.gap.checked_mul(self.gap),
            other.gap.checked_mul(other.gap),
        ) {
            (Some(a), Some(b)) => mul_wide(a, other.weight) > mul_wide(b, self.weight),
            _ => self.approx() > other.approx(),
        }
    }

    fn approx(self) -> f64 {
        let g = self.gap as f64;
        g * g / self.weight as f64
    }
}

/// Full 256-bit product as `(high, low)` halves.
fn mul_wide(a: u128, b: u128) -> (u128, u128) {
    const LO: u128 = u64::MAX as u128;
    let (a0, a1) = (a & LO, a >> 64);
    let (b0, b1) = (b & LO, b >> 64);
    let p00 = a0 * b0;
    let p01 = a0 * b1;
    let p10 = a1 * b0;
    let p11 = a1 * b1;
    let mid = (p00 >> 64) + (p01 & LO) + (p10 & LO);
    let low = (p00 & LO) | (mid << 64);
    let high = p11 + (p01 >> 64) + (p10 >> 64) + (mid >> 64);
    (high, low)
}

/// Otsu threshold `t`: voxels with intensity `< t` form the lower class.
///
/// Scans every candidate `t` in `1..=max_value` and keeps the first maximiser
/// of the between-class variance.
pub fn otsu_level(gray: &GrayVolume) -> Result<u16> {
    let max = gray.depth().max_value() as usize;
    let mut hist = vec![0u64; max + 1];
    for &v in gray.data() {
        hist[v as usize] += 1;
    }
    let total_n: u64 = gray.data().len() as u64;
    let total_s: u128 = hist
        .iter()
        .enumerate()
        .map(|(i, &c)| i as u128 * c as u128)
        .sum();

    let mut best: Option<(u16, SplitScore)> = None;
    let (mut n0, mut s0) = (0u64, 0u128);
    for t in 1..=max {
        n0 += hist[t - 1];
        s0 += (t as u128 - 1) * hist[t - 1] as u128;
        let n1 = total_n - n0;
        if n0 == 0 || n1 == 0 {
            continue;
        }
        let score = SplitScore::new(n0, s0, n1, total_s - s0);
        if best.is_none_or(|(_, b)| score.beats(b)) {
            best = Some((t as u16, score));
        }
    }
    best.map(|(t, _)| t).ok_or(Error::DegenerateThreshold)
}

/// Segments `gray` at its Otsu level. The output keeps the input scale.
pub fn otsu_threshold(gray: &GrayVolume, polarity: Polarity) -> Result<BinaryVolume> {
    let t = otsu_level(gray)?;
    log::debug!("otsu threshold {t}");
    Ok(apply_threshold(gray, t, polarity))
}

pub fn apply_threshold(gray: &GrayVolume, t: u16, polarity: Polarity) -> BinaryVolume {
    let (below, above) = match polarity {
        Polarity::PoresDark => (PORE, ROCK),
        Polarity::PoresBright => (ROCK, PORE),
    };
    let data = gray
        .data()
        .iter()
        .map(|&v| if v < t { below } else { above })
        .collect();
    BinaryVolume::from_parts_unchecked(gray.dims(), gray.scale(), data)
}

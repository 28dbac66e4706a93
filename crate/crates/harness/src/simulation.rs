//! HR / simulated-LR pairs cut from a single source volume.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use msrec_core::resample::downsample_mean;
use msrec_core::threshold::{otsu_threshold, Polarity};
use msrec_core::{BinaryVolume, Dims, Error, Result, Volume};

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationPair {
    pub hr: BinaryVolume,
    pub lr: BinaryVolume,
    /// The LR cut before downsampling: the true fine structure the
    /// reconstruction should recover.
    pub reference: BinaryVolume,
    pub cuts: CutPlacement,
}

/// Where the two cuts sit in the source, in source voxels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CutPlacement {
    pub size: Dims,
    pub hr_origin: [usize; 3],
    pub lr_origin: [usize; 3],
    /// Axis along which the two cuts are separated.
    pub split_axis: usize,
}

impl CutPlacement {
    /// Half-open boxes `[origin, origin + size)` intersect on every axis.
    pub fn overlaps(&self) -> bool {
        (0..3).all(|a| {
            let (p, q) = (self.hr_origin[a], self.lr_origin[a]);
            p < q + self.size[a] && q < p + self.size[a]
        })
    }
}

/// Draws two disjoint `cut`-sized boxes inside `source`.
///
/// Two equal boxes are disjoint exactly when they are separated along some
/// axis, which needs `source >= 2 * cut` on that axis. One such axis is
/// picked, the pair of origins along it is drawn with a gap of at least
/// `cut`, the other axes are drawn independently, and the HR / LR roles are
/// assigned by a coin flip.
pub fn place_cuts(source: Dims, cut: Dims, seed: u64) -> Result<CutPlacement> {
    if (0..3).any(|a| cut[a] == 0 || cut[a] > source[a]) {
        return Err(Error::TooSmall(format!(
            "source {source:?} cannot hold a {cut:?} cut"
        )));
    }
    let axes: Vec<usize> = (0..3).filter(|&a| source[a] >= 2 * cut[a]).collect();
    if axes.is_empty() {
        return Err(Error::TooSmall(format!(
            "source {source:?} cannot hold two non-overlapping {cut:?} cuts"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let split_axis = axes[rng.gen_range(0..axes.len())];
    let mut a = [0usize; 3];
    let mut b = [0usize; 3];
    for axis in 0..3 {
        let slack = source[axis] - cut[axis];
        if axis == split_axis {
            a[axis] = rng.gen_range(0..=slack - cut[axis]);
            b[axis] = rng.gen_range(a[axis] + cut[axis]..=slack);
        } else {
            a[axis] = rng.gen_range(0..=slack);
            b[axis] = rng.gen_range(0..=slack);
        }
    }
    if rng.gen::<bool>() {
        std::mem::swap(&mut a, &mut b);
    }
    Ok(CutPlacement {
        size: cut,
        hr_origin: a,
        lr_origin: b,
        split_axis,
    })
}

fn to_binary(volume: Volume, polarity: Polarity) -> Result<BinaryVolume> {
    match volume {
        Volume::Binary(b) => Ok(b),
        Volume::Gray(g) => otsu_threshold(&g, polarity),
    }
}

/// Cuts an HR volume and a simulated LR volume (downsampled by `factor`)
/// from disjoint regions of `source`. Gray inputs are Otsu-thresholded
/// after downsampling; each cut gets its own threshold.
pub fn make_simulation_pair(
    source: &Volume,
    cut: Dims,
    factor: usize,
    seed: u64,
    polarity: Polarity,
) -> Result<SimulationPair> {
    if factor < 2 {
        return Err(Error::InvalidInput(format!(
            "downsample factor must be ≥ 2, got {factor}"
        )));
    }
    if let Some(d) = cut.iter().find(|&&d| d % factor != 0) {
        return Err(Error::InvalidInput(format!(
            "factor {factor} does not divide cut dimension {d}"
        )));
    }
    let cuts = place_cuts(source.dims(), cut, seed)?;
    let hr = to_binary(source.crop(cuts.hr_origin, cut)?, polarity)?;
    let lr_cut = source.crop(cuts.lr_origin, cut)?;
    let lr = to_binary(downsample_mean(&lr_cut, factor)?, polarity)?;
    let reference = to_binary(lr_cut, polarity)?;
    Ok(SimulationPair {
        hr,
        lr,
        reference,
        cuts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_fit_uses_both_halves() {
        for seed in 0..20 {
            let c = place_cuts([8, 8, 16], [8, 8, 8], seed).unwrap();
            assert_eq!(c.split_axis, 2);
            let mut zs = [c.hr_origin[2], c.lr_origin[2]];
            zs.sort();
            assert_eq!(zs, [0, 8]);
        }
    }

    #[test]
    fn impossible_layouts() {
        assert!(matches!(
            place_cuts([15, 15, 15], [8, 8, 8], 0),
            Err(Error::TooSmall(_))
        ));
        assert!(matches!(
            place_cuts([4, 40, 40], [8, 8, 8], 0),
            Err(Error::TooSmall(_))
        ));
    }

    #[test]
    fn scales_follow_factor() {
        let src =
            BinaryVolume::from_fn([16, 16, 32], 2.35, |x, y, z| (x + y + z) % 3 == 0).unwrap();
        let pair =
            make_simulation_pair(&src.into(), [16, 16, 16], 4, 1, Polarity::PoresDark).unwrap();
        assert_eq!(pair.hr.dims(), [16, 16, 16]);
        assert_eq!(pair.lr.dims(), [4, 4, 4]);
        assert_eq!(pair.hr.scale(), 2.35);
        assert!((pair.lr.scale() - 9.4).abs() < 1e-12);
        assert!(!pair.cuts.overlaps());
        assert_eq!(pair.reference.dims(), [16, 16, 16]);
        assert_eq!(pair.reference.scale(), 2.35);
    }

    #[test]
    fn factor_must_divide_cut() {
        let src = BinaryVolume::filled([30, 30, 60], 1.0, 0).unwrap();
        assert!(
            make_simulation_pair(&src.into(), [30, 30, 30], 4, 0, Polarity::PoresDark).is_err()
        );
    }
}

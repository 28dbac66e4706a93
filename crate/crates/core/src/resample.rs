//! Block-mean downsampling.

use crate::error::{Error, Result};
use crate::volume::{
    linear_index, voxel_count, BinaryVolume, Dims, GrayVolume, Volume, PORE, ROCK,
};

fn output_dims(dims: Dims, factor: usize) -> Result<Dims> {
    if factor < 1 {
        return Err(Error::InvalidInput("downsample factor must be ≥ 1".into()));
    }
    let out = dims.map(|d| d / factor);
    if out.contains(&0) {
        return Err(Error::TooSmall(format!(
            "dims {dims:?} smaller than downsample factor {factor}"
        )));
    }
    if dims.iter().any(|&d| d % factor != 0) {
        log::warn!("dims {dims:?} not divisible by {factor}; trailing voxels dropped");
    }
    Ok(out)
}

/// Sums each `factor³` block into the output grid.
fn block_sums(dims: Dims, factor: usize, out: Dims, value: impl Fn(usize) -> u64) -> Vec<u64> {
    let mut sums = vec![0u64; voxel_count(out)];
    for z in 0..out[2] * factor {
        for y in 0..out[1] * factor {
            let row = linear_index(dims, 0, y, z);
            let orow = linear_index(out, 0, y / factor, z / factor);
            for x in 0..out[0] * factor {
                sums[orow + x / factor] += value(row + x);
            }
        }
    }
    sums
}

/// Mean-pools `factor³` blocks and thresholds at 0.5. A block exactly half
/// pore takes the phase of its min-corner voxel, so ties favour neither phase.
pub fn downsample_binary(volume: &BinaryVolume, factor: usize) -> Result<BinaryVolume> {
    let out = output_dims(volume.dims(), factor)?;
    if factor == 1 {
        return Ok(volume.clone());
    }
    let block = (factor * factor * factor) as u64;
    let data = volume.data();
    let sums = block_sums(volume.dims(), factor, out, |i| data[i] as u64);
    let [ox, oy, _] = out;
    let dims = volume.dims();
    let data = sums
        .into_iter()
        .enumerate()
        .map(|(i, s)| match (2 * s).cmp(&block) {
            std::cmp::Ordering::Greater => PORE,
            std::cmp::Ordering::Less => ROCK,
            std::cmp::Ordering::Equal => {
                let (x, y, z) = (i % ox, i / ox % oy, i / (ox * oy));
                data[linear_index(dims, x * factor, y * factor, z * factor)]
            }
        })
        .collect();
    Ok(BinaryVolume::from_parts_unchecked(
        out,
        volume.scale() * factor as f64,
        data,
    ))
}

/// Mean-pools `factor³` blocks, rounding half up.
pub fn downsample_gray(volume: &GrayVolume, factor: usize) -> Result<GrayVolume> {
    let out = output_dims(volume.dims(), factor)?;
    if factor == 1 {
        return Ok(volume.clone());
    }
    let block = (factor * factor * factor) as u64;
    let data = volume.data();
    let sums = block_sums(volume.dims(), factor, out, |i| data[i] as u64);
    let data = sums
        .into_iter()
        .map(|s| ((s + block / 2) / block) as u16)
        .collect();
    GrayVolume::new(out, volume.scale() * factor as f64, volume.depth(), data)
}

pub fn downsample_mean(volume: &Volume, factor: usize) -> Result<Volume> {
    Ok(match volume {
        Volume::Binary(v) => Volume::Binary(downsample_binary(v, factor)?),
        Volume::Gray(v) => Volume::Gray(downsample_gray(v, factor)?),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::volume::PORE;

    #[test]
    fn constant_block_collapses() {
        let v = BinaryVolume::filled([4, 4, 4], 2.35, PORE).unwrap();
        let d = downsample_binary(&v, 4).unwrap();
        assert_eq!(d.dims(), [1, 1, 1]);
        assert_eq!(d.data(), &[1]);
        assert!((d.scale() - 9.4).abs() < 1e-12);
    }

    #[test]
    fn factor_one_is_identity() {
        let v = BinaryVolume::from_fn([3, 2, 5], 1.0, |x, y, z| (x * y + z) % 3 == 0).unwrap();
        assert_eq!(downsample_binary(&v, 1).unwrap(), v);
    }

    #[test]
    fn zero_factor_rejected() {
        let v = BinaryVolume::filled([2, 2, 2], 1.0, 0).unwrap();
        assert!(downsample_binary(&v, 0).is_err());
    }

    #[test]
    fn half_full_block_follows_corner() {
        let v = BinaryVolume::from_fn([2, 2, 2], 1.0, |x, _, _| x == 0).unwrap();
        assert_eq!(downsample_binary(&v, 2).unwrap().data(), &[1]);
        let v = BinaryVolume::from_fn([2, 2, 2], 1.0, |x, _, _| x == 1).unwrap();
        assert_eq!(downsample_binary(&v, 2).unwrap().data(), &[0]);
        let v = BinaryVolume::from_fn([2, 2, 2], 1.0, |x, y, _| x == 0 && y == 0).unwrap();
        assert_eq!(downsample_binary(&v, 2).unwrap().data(), &[0]);
        let v = BinaryVolume::from_fn([2, 2, 2], 1.0, |x, y, _| x + y > 0).unwrap();
        assert_eq!(downsample_binary(&v, 2).unwrap().data(), &[1]);
    }

    #[test]
    fn trailing_voxels_dropped() {
        let v = BinaryVolume::filled([5, 4, 4], 1.0, PORE).unwrap();
        let d = downsample_binary(&v, 2).unwrap();
        assert_eq!(d.dims(), [2, 2, 2]);
        for a in 0..3 {
            assert!(d.fov()[a] <= v.fov()[a]);
        }
    }
}

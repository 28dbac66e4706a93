//! Binary dilation with the 3³ structuring element.

use crate::volume::{linear_index, BinaryVolume, Dims, PORE};

/// Dilates `radius` times with the 26-neighbour cube, i.e. marks every voxel
/// within Chebyshev distance `radius` of a pore voxel. Outside the domain is rock.
pub fn dilate(volume: &BinaryVolume, radius: usize) -> BinaryVolume {
    if radius == 0 {
        return volume.clone();
    }
    let mut data = volume.data().to_vec();
    let dims = volume.dims();
    for axis in 0..3 {
        max_filter_axis(&mut data, dims, axis, radius);
    }
    BinaryVolume::from_parts_unchecked(dims, volume.scale(), data)
}

/// In-place running max over windows `[i - r, i + r]` along one axis.
fn max_filter_axis(data: &mut [u8], dims: Dims, axis: usize, radius: usize) {
    let n = dims[axis];
    let stride = match axis {
        0 => 1,
        1 => dims[0],
        _ => dims[0] * dims[1],
    };
    let (a, b) = match axis {
        0 => (1, 2),
        1 => (0, 2),
        _ => (0, 1),
    };
    let mut line = vec![0u8; n];
    for j in 0..dims[b] {
        for i in 0..dims[a] {
            let mut origin = [0usize; 3];
            origin[a] = i;
            origin[b] = j;
            let base = linear_index(dims, origin[0], origin[1], origin[2]);
            for (k, v) in line.iter_mut().enumerate() {
                *v = data[base + k * stride];
            }
            // Distance from each cell to the nearest pore on the left, capped.
            let mut since = usize::MAX;
            let mut left = vec![usize::MAX; n];
            for k in 0..n {
                since = if line[k] == PORE {
                    0
                } else {
                    since.saturating_add(1)
                };
                left[k] = since;
            }
            since = usize::MAX;
            for k in (0..n).rev() {
                since = if line[k] == PORE {
                    0
                } else {
                    since.saturating_add(1)
                };
                let hit = left[k].min(since) <= radius;
                data[base + k * stride] = hit as u8;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_voxel_grows_to_cube() {
        let v = BinaryVolume::from_fn([5, 5, 5], 1.0, |x, y, z| (x, y, z) == (2, 2, 2)).unwrap();
        let d = dilate(&v, 1);
        let expected = BinaryVolume::from_fn([5, 5, 5], 1.0, |x, y, z| {
            (1..=3).contains(&x) && (1..=3).contains(&y) && (1..=3).contains(&z)
        })
        .unwrap();
        assert_eq!(d, expected);
        assert_eq!(d.pore_count(), 27);
    }

    #[test]
    fn radius_zero_is_identity() {
        let v = BinaryVolume::from_fn([4, 3, 2], 1.0, |x, y, z| (x + 2 * y + z) % 3 == 0).unwrap();
        assert_eq!(dilate(&v, 0), v);
    }

    #[test]
    fn clipped_at_domain_edge() {
        let v = BinaryVolume::from_fn([3, 1, 1], 1.0, |x, _, _| x == 0).unwrap();
        assert_eq!(dilate(&v, 5).data(), &[1, 1, 1]);
        assert_eq!(dilate(&v, 1).data(), &[1, 1, 0]);
    }
}

//! Exact Euclidean distance transform (separable lower-envelope method of
//! Felzenszwalb and Huttenlocher).
//!
//! Every voxel outside the domain counts as rock, so pore distances are
//! bounded by the distance to the nearest outside voxel.

use crate::volume::{linear_index, voxel_count, BinaryVolume, Dims, PORE};

/// Per-voxel distance field in voxel units.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceField {
    dims: Dims,
    squared: Vec<u64>,
}

impl DistanceField {
    pub fn dims(&self) -> Dims {
        self.dims
    }

    /// Exact squared distances (integers).
    pub fn squared(&self) -> &[u64] {
        &self.squared
    }

    pub fn distance(&self, idx: usize) -> f64 {
        (self.squared[idx] as f64).sqrt()
    }

    pub fn distances(&self) -> Vec<f64> {
        self.squared.iter().map(|&d| (d as f64).sqrt()).collect()
    }
}

/// Distance from each pore voxel centre to the nearest rock voxel centre; 0 on rock.
pub fn euclidean_distance_transform(volume: &BinaryVolume) -> DistanceField {
    let dims = volume.dims();
    let mut f: Vec<u64> = volume
        .data()
        .iter()
        .map(|&v| if v == PORE { u64::MAX } else { 0 })
        .collect();
    let mut envelope = Envelope::with_capacity(dims.iter().copied().max().unwrap_or(0) + 2);
    for axis in 0..3 {
        transform_axis(&mut f, dims, axis, &mut envelope);
    }
    debug_assert_eq!(f.len(), voxel_count(dims));
    DistanceField { dims, squared: f }
}

fn transform_axis(f: &mut [u64], dims: Dims, axis: usize, env: &mut Envelope) {
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
    // Line padded with one rock site on each side (outside the domain).
    let mut line = vec![0u64; n + 2];
    let mut out = vec![0u64; n + 2];
    for j in 0..dims[b] {
        for i in 0..dims[a] {
            let mut origin = [0usize; 3];
            origin[a] = i;
            origin[b] = j;
            let base = linear_index(dims, origin[0], origin[1], origin[2]);
            line[0] = 0;
            line[n + 1] = 0;
            for k in 0..n {
                line[k + 1] = f[base + k * stride];
            }
            env.transform(&line, &mut out);
            for k in 0..n {
                f[base + k * stride] = out[k + 1];
            }
        }
    }
}

/// 1D squared distance transform of a sampled function: `d(p) = min_q f(q) + (p - q)²`.
struct Envelope {
    sites: Vec<usize>,
    bounds: Vec<f64>,
}

impl Envelope {
    fn with_capacity(n: usize) -> Self {
        Envelope {
            sites: Vec::with_capacity(n),
            bounds: Vec::with_capacity(n + 1),
        }
    }

    fn transform(&mut self, f: &[u64], out: &mut [u64]) {
        self.sites.clear();
        self.bounds.clear();
        let fq = |q: usize| f[q] as f64 + (q * q) as f64;
        for q in 0..f.len() {
            if f[q] == u64::MAX {
                continue;
            }
            loop {
                match self.sites.last() {
                    None => {
                        self.sites.push(q);
                        self.bounds.push(f64::NEG_INFINITY);
                        break;
                    }
                    Some(&v) => {
                        let s = (fq(q) - fq(v)) / (2.0 * (q - v) as f64);
                        if s <= *self.bounds.last().unwrap() {
                            self.sites.pop();
                            self.bounds.pop();
                        } else {
                            self.sites.push(q);
                            self.bounds.push(s);
                            break;
                        }
                    }
                }
            }
        }
        // Padding guarantees at least one finite site.
        let mut k = 0usize;
        for (p, o) in out.iter_mut().enumerate() {
            while k + 1 < self.sites.len() && self.bounds[k + 1] < p as f64 {
                k += 1;
            }
            let q = self.sites[k];
            let d = p.abs_diff(q) as u64;
            *o = f[q] + d * d;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_pore_voxel() {
        let v = BinaryVolume::from_fn([3, 3, 3], 1.0, |x, y, z| (x, y, z) == (1, 1, 1)).unwrap();
        let d = euclidean_distance_transform(&v);
        assert_eq!(d.distance(13), 1.0);
        assert_eq!(d.squared().iter().filter(|&&s| s > 0).count(), 1);
    }

    #[test]
    fn boundary_is_rock() {
        let v = BinaryVolume::filled([5, 5, 5], 1.0, PORE).unwrap();
        let d = euclidean_distance_transform(&v);
        assert_eq!(d.distance(linear_index([5, 5, 5], 2, 2, 2)), 3.0);
        assert_eq!(d.distance(0), 1.0);
    }

    #[test]
    fn diagonal_rock() {
        // 1D line of pores with rock only at one end inside the domain
        let v = BinaryVolume::new([4, 1, 1], 1.0, vec![0, 1, 1, 1]).unwrap();
        let d = euclidean_distance_transform(&v);
        // y/z neighbours outside the domain are at distance 1
        assert_eq!(d.squared(), &[0, 1, 1, 1]);
    }
}

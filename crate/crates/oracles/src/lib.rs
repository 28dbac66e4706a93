//! Slow, obviously-correct reference implementations.
//!
//! Everything here works on plain `&[u8]` voxel arrays (x fastest, `1` =
//! pore) so the oracles share no code with the library they check. The
//! [`suites`] module drives seeded comparisons against caller-supplied
//! adapters.

use std::collections::{HashMap, VecDeque};

pub mod suites;

pub type Dims = [usize; 3];

fn at(dims: Dims, x: usize, y: usize, z: usize) -> usize {
    x + dims[0] * (y + dims[1] * z)
}

fn neighbours(dims: Dims, p: [usize; 3], full: bool) -> Vec<[usize; 3]> {
    let mut out = Vec::new();
    for dz in -1i64..=1 {
        for dy in -1i64..=1 {
            for dx in -1i64..=1 {
                let manhattan = dx.abs() + dy.abs() + dz.abs();
                if manhattan == 0 || (!full && manhattan > 1) {
                    continue;
                }
                let q = [p[0] as i64 + dx, p[1] as i64 + dy, p[2] as i64 + dz];
                if (0..3).all(|a| q[a] >= 0 && q[a] < dims[a] as i64) {
                    out.push(q.map(|c| c as usize));
                }
            }
        }
    }
    out
}

/// Breadth-first flood fill. Components are numbered from 1 in the raster
/// order of their first voxel. Returns labels and the component count.
pub fn flood_fill_labels(data: &[u8], dims: Dims, full: bool) -> (Vec<u32>, usize) {
    let mut labels = vec![0u32; data.len()];
    let mut next = 0u32;
    for z in 0..dims[2] {
        for y in 0..dims[1] {
            for x in 0..dims[0] {
                let i = at(dims, x, y, z);
                if data[i] != 1 || labels[i] != 0 {
                    continue;
                }
                next += 1;
                labels[i] = next;
                let mut queue = VecDeque::from([[x, y, z]]);
                while let Some(p) = queue.pop_front() {
                    for q in neighbours(dims, p, full) {
                        let j = at(dims, q[0], q[1], q[2]);
                        if data[j] == 1 && labels[j] == 0 {
                            labels[j] = next;
                            queue.push_back(q);
                        }
                    }
                }
            }
        }
    }
    (labels, next as usize)
}

/// Component sizes indexed by `label - 1`.
pub fn component_sizes(labels: &[u32], count: usize) -> Vec<usize> {
    let mut sizes = vec![0; count];
    for &l in labels.iter().filter(|&&l| l > 0) {
        sizes[l as usize - 1] += 1;
    }
    sizes
}

/// Exhaustive Otsu: for every `t` in `1..=max`, splits the voxels into
/// `< t` and `>= t` by direct counting and keeps the first `t` with the
/// largest between-class variance `n0 n1 (mu0 - mu1)^2`, compared exactly
/// as fractions.
pub fn otsu_exhaustive(values: &[u16], max: u16) -> Option<u16> {
    let mut best: Option<(u16, u128, u128)> = None;
    for t in 1..=max {
        let (mut n0, mut s0, mut n1, mut s1) = (0i128, 0i128, 0i128, 0i128);
        for &v in values {
            if v < t {
                n0 += 1;
                s0 += v as i128;
            } else {
                n1 += 1;
                s1 += v as i128;
            }
        }
        if n0 == 0 || n1 == 0 {
            continue;
        }
        // n0 n1 (s0/n0 - s1/n1)^2 = (s0 n1 - s1 n0)^2 / (n0 n1)
        let num = (s0 * n1 - s1 * n0).pow(2) as u128;
        let den = (n0 * n1) as u128;
        let better = match best {
            None => true,
            Some((_, bn, bd)) => num * bd > bn * den,
        };
        if better {
            best = Some((t, num, den));
        }
    }
    best.map(|(t, _, _)| t)
}

/// Pore wherever any pore voxel lies within Chebyshev distance `r`.
pub fn chebyshev_dilate(data: &[u8], dims: Dims, r: usize) -> Vec<u8> {
    let mut out = vec![0u8; data.len()];
    for z in 0..dims[2] {
        for y in 0..dims[1] {
            for x in 0..dims[0] {
                let mut hit = false;
                for qz in z.saturating_sub(r)..=(z + r).min(dims[2] - 1) {
                    for qy in y.saturating_sub(r)..=(y + r).min(dims[1] - 1) {
                        for qx in x.saturating_sub(r)..=(x + r).min(dims[0] - 1) {
                            hit |= data[at(dims, qx, qy, qz)] == 1;
                        }
                    }
                }
                out[at(dims, x, y, z)] = hit as u8;
            }
        }
    }
    out
}

/// Squared distance from each pore voxel to the nearest rock voxel, where
/// the layer just outside the domain also counts as rock. Rock is 0.
pub fn edt_all_pairs(data: &[u8], dims: Dims) -> Vec<u64> {
    let rocks: Vec<[i64; 3]> = (0..dims[2])
        .flat_map(|z| (0..dims[1]).flat_map(move |y| (0..dims[0]).map(move |x| [x, y, z])))
        .filter(|p| data[at(dims, p[0], p[1], p[2])] == 0)
        .map(|p| p.map(|c| c as i64))
        .collect();
    let mut out = vec![0u64; data.len()];
    for z in 0..dims[2] {
        for y in 0..dims[1] {
            for x in 0..dims[0] {
                let i = at(dims, x, y, z);
                if data[i] == 0 {
                    continue;
                }
                let p = [x, y, z];
                let mut best = (0..3)
                    .map(|a| {
                        let d = (p[a] + 1).min(dims[a] - p[a]) as u64;
                        d * d
                    })
                    .min()
                    .unwrap();
                for q in &rocks {
                    let d: i64 = (0..3).map(|a| (p[a] as i64 - q[a]).pow(2)).sum();
                    best = best.min(d as u64);
                }
                out[i] = best;
            }
        }
    }
    out
}

/// Two-point correlation by enumerating every in-domain axis-aligned pair:
/// per axis the fraction of pairs `r` apart that are both pore, averaged
/// over x, y and z. `S2(0)` is the plain porosity.
pub fn s2_all_pairs(data: &[u8], dims: Dims, max_lag: usize) -> Vec<f64> {
    let porosity = data.iter().filter(|&&v| v == 1).count() as f64 / data.len() as f64;
    let mut out = vec![porosity];
    for r in 1..=max_lag {
        let mut sum = 0.0;
        for axis in 0..3 {
            let (mut both, mut pairs) = (0u64, 0u64);
            for z in 0..dims[2] {
                for y in 0..dims[1] {
                    for x in 0..dims[0] {
                        let mut q = [x, y, z];
                        q[axis] += r;
                        if q[axis] >= dims[axis] {
                            continue;
                        }
                        pairs += 1;
                        if data[at(dims, x, y, z)] == 1 && data[at(dims, q[0], q[1], q[2])] == 1 {
                            both += 1;
                        }
                    }
                }
            }
            sum += both as f64 / pairs as f64;
        }
        out.push(sum / 3.0);
    }
    out
}

/// Block-mean downsampling of a binary volume: majority phase, exact ties
/// take the block's first voxel. Trailing partial blocks are dropped.
pub fn downsample_naive(data: &[u8], dims: Dims, f: usize) -> (Vec<u8>, Dims) {
    let out_dims = dims.map(|d| d / f);
    let mut out = Vec::new();
    for z in 0..out_dims[2] {
        for y in 0..out_dims[1] {
            for x in 0..out_dims[0] {
                let mut pores = 0;
                for k in 0..f {
                    for j in 0..f {
                        for i in 0..f {
                            pores += data[at(dims, x * f + i, y * f + j, z * f + k)] as usize;
                        }
                    }
                }
                let half = f * f * f;
                out.push(if 2 * pores == half {
                    data[at(dims, x * f, y * f, z * f)]
                } else {
                    (2 * pores > half) as u8
                });
            }
        }
    }
    (out, out_dims)
}

/// Skeleton code and edge fill of the 5³ window at `origin`. Positions with
/// all-even local coordinates feed the skeleton code, the rest the fill,
/// each numbered in raster order.
pub fn window_codes(data: &[u8], dims: Dims, origin: [usize; 3]) -> (u32, u128) {
    let (mut code, mut fill) = (0u32, 0u128);
    let (mut ks, mut kp) = (0, 0);
    for k in 0..5 {
        for j in 0..5 {
            for i in 0..5 {
                let v = data[at(dims, origin[0] + i, origin[1] + j, origin[2] + k)];
                if i % 2 == 0 && j % 2 == 0 && k % 2 == 0 {
                    code |= (v as u32) << ks;
                    ks += 1;
                } else {
                    fill |= (v as u128) << kp;
                    kp += 1;
                }
            }
        }
    }
    (code, fill)
}

/// Every distinct 5³ window of the volume grouped by skeleton code. Classes
/// and the fills within a class appear in raster order of first occurrence.
pub fn epd_scan(data: &[u8], dims: Dims) -> Vec<(u32, Vec<u128>)> {
    let mut classes: Vec<(u32, Vec<u128>)> = Vec::new();
    for z in 0..=dims[2] - 5 {
        for y in 0..=dims[1] - 5 {
            for x in 0..=dims[0] - 5 {
                let (code, fill) = window_codes(data, dims, [x, y, z]);
                match classes.iter_mut().find(|(c, _)| *c == code) {
                    Some((_, fills)) => {
                        if !fills.contains(&fill) {
                            fills.push(fill);
                        }
                    }
                    None => classes.push((code, vec![fill])),
                }
            }
        }
    }
    classes
}

/// Smallest Hamming distance to `query` and every index attaining it.
pub fn nearest_linear(codes: &[u32], query: u32) -> (u32, Vec<usize>) {
    let dist = |c: u32| (0..27).filter(|b| (c >> b) & 1 != (query >> b) & 1).count() as u32;
    let best = codes.iter().map(|&c| dist(c)).min().unwrap();
    let idx = (0..codes.len())
        .filter(|&i| dist(codes[i]) == best)
        .collect();
    (best, idx)
}

/// Disagreements of `fill` with the decided pending voxels (`decided[k]`
/// is `Some(value)` for committed position `k`).
pub fn fill_disagreements(fill: u128, decided: &[Option<u8>]) -> u32 {
    decided
        .iter()
        .enumerate()
        .filter(|(k, d)| d.is_some_and(|v| ((fill >> k) & 1) as u8 != v))
        .count() as u32
}

/// Lowest disagreement score and every fill index attaining it.
pub fn best_fills_linear(fills: &[u128], decided: &[Option<u8>]) -> (u32, Vec<usize>) {
    let best = fills
        .iter()
        .map(|&f| fill_disagreements(f, decided))
        .min()
        .unwrap();
    let idx = (0..fills.len())
        .filter(|&i| fill_disagreements(fills[i], decided) == best)
        .collect();
    (best, idx)
}

/// Bounding-box crops of the components whose size lies in `[lo, hi]`, in
/// label order: `(dims, mask)` with mask 1 only on the component's voxels.
pub fn micropore_elements(
    data: &[u8],
    dims: Dims,
    full: bool,
    lo: usize,
    hi: usize,
) -> Vec<(Dims, Vec<u8>)> {
    let (labels, count) = flood_fill_labels(data, dims, full);
    let mut out = Vec::new();
    for label in 1..=count as u32 {
        let voxels: Vec<[usize; 3]> = (0..data.len())
            .filter(|&i| labels[i] == label)
            .map(|i| {
                [
                    i % dims[0],
                    (i / dims[0]) % dims[1],
                    i / (dims[0] * dims[1]),
                ]
            })
            .collect();
        if voxels.len() < lo || voxels.len() > hi {
            continue;
        }
        let min = [0, 1, 2].map(|a| voxels.iter().map(|v| v[a]).min().unwrap());
        let max = [0, 1, 2].map(|a| voxels.iter().map(|v| v[a]).max().unwrap());
        let edims = [0, 1, 2].map(|a| max[a] - min[a] + 1);
        let mut mask = vec![0u8; edims[0] * edims[1] * edims[2]];
        for v in &voxels {
            mask[at(edims, v[0] - min[0], v[1] - min[1], v[2] - min[2])] = 1;
        }
        out.push((edims, mask));
    }
    out
}

/// Components of `after` that contain no voxel that was already pore in
/// `before`, found by labelling `after` from scratch.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NewComponents {
    pub sizes: Vec<usize>,
    /// New components with a voxel 26-adjacent to a pore voxel of `before`.
    pub touching: usize,
    /// Voxels of `before` that are no longer pore.
    pub lost: usize,
}

pub fn new_components(before: &[u8], after: &[u8], dims: Dims, full: bool) -> NewComponents {
    let (labels, count) = flood_fill_labels(after, dims, full);
    let mut old = vec![false; count];
    for i in 0..after.len() {
        if before[i] == 1 && labels[i] > 0 {
            old[labels[i] as usize - 1] = true;
        }
    }
    let sizes_all = component_sizes(&labels, count);
    let mut touching = vec![false; count];
    for z in 0..dims[2] {
        for y in 0..dims[1] {
            for x in 0..dims[0] {
                let l = labels[at(dims, x, y, z)];
                if l == 0 || old[l as usize - 1] {
                    continue;
                }
                if neighbours(dims, [x, y, z], true)
                    .iter()
                    .any(|q| before[at(dims, q[0], q[1], q[2])] == 1)
                {
                    touching[l as usize - 1] = true;
                }
            }
        }
    }
    NewComponents {
        sizes: (0..count)
            .filter(|&c| !old[c])
            .map(|c| sizes_all[c])
            .collect(),
        touching: (0..count).filter(|&c| !old[c] && touching[c]).count(),
        lost: (0..after.len())
            .filter(|&i| before[i] == 1 && after[i] != 1)
            .count(),
    }
}

/// Size histogram of the components.
pub fn cc_histogram(data: &[u8], dims: Dims, full: bool) -> HashMap<usize, usize> {
    let (labels, count) = flood_fill_labels(data, dims, full);
    let mut h = HashMap::new();
    for s in component_sizes(&labels, count) {
        *h.entry(s).or_insert(0) += 1;
    }
    h
}

/// Largest squared EDT value inside each component, from the all-pairs EDT.
pub fn component_max_edt(data: &[u8], dims: Dims, full: bool) -> Vec<u64> {
    let (labels, count) = flood_fill_labels(data, dims, full);
    let edt = edt_all_pairs(data, dims);
    let mut best = vec![0u64; count];
    for i in 0..data.len() {
        if labels[i] > 0 {
            let b = &mut best[labels[i] as usize - 1];
            *b = (*b).max(edt[i]);
        }
    }
    best
}

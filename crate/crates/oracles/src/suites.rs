//! Seeded equivalence suites. Each suite generates `cases` random inputs
//! from `seed`, runs the caller's adapter and the oracle on each, and
//! returns the number of cases checked or a description of the first
//! mismatch.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::*;

pub type SuiteResult = Result<usize, String>;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_dims<R: Rng>(rng: &mut R, lo: usize, hi: usize) -> Dims {
    [0; 3].map(|_| rng.gen_range(lo..=hi))
}

/// Binary volume with a random porosity; every other case is blocky
/// (2×2×2 cells) so structures span several voxels.
pub fn random_binary<R: Rng>(rng: &mut R, dims: Dims, blocky: bool) -> Vec<u8> {
    let p: f64 = rng.gen_range(0.05..0.75);
    if !blocky {
        return (0..dims[0] * dims[1] * dims[2])
            .map(|_| rng.gen_bool(p) as u8)
            .collect();
    }
    let cells = dims.map(|d| d.div_ceil(2));
    let coarse: Vec<u8> = (0..cells[0] * cells[1] * cells[2])
        .map(|_| rng.gen_bool(p) as u8)
        .collect();
    let mut out = Vec::with_capacity(dims[0] * dims[1] * dims[2]);
    for z in 0..dims[2] {
        for y in 0..dims[1] {
            for x in 0..dims[0] {
                let mut v = coarse[at(cells, x / 2, y / 2, z / 2)];
                // sparse noise breaks perfect block structure
                if rng.gen_bool(0.05) {
                    v ^= 1;
                }
                out.push(v);
            }
        }
    }
    out
}

fn fail(suite: &str, case: usize, detail: impl std::fmt::Display) -> String {
    format!("{suite}: case {case}: {detail}")
}

pub fn labeling(
    cases: usize,
    seed: u64,
    f: impl Fn(&[u8], Dims, bool) -> (Vec<u32>, usize),
) -> SuiteResult {
    let mut r = rng(seed);
    for case in 0..cases {
        let dims = random_dims(&mut r, 1, 14);
        let data = random_binary(&mut r, dims, case % 2 == 1);
        let full = case % 3 != 0;
        if f(&data, dims, full) != flood_fill_labels(&data, dims, full) {
            return Err(fail(
                "labeling",
                case,
                format!("dims {dims:?}, 26-connected {full}"),
            ));
        }
    }
    Ok(cases)
}

/// `f` gets the intensities, dims and the bit-depth maximum.
pub fn otsu(cases: usize, seed: u64, f: impl Fn(&[u16], Dims, u16) -> Option<u16>) -> SuiteResult {
    let mut r = rng(seed);
    for case in 0..cases {
        let (dims, max) = if case % 5 == 4 {
            (random_dims(&mut r, 2, 4), u16::MAX)
        } else {
            (random_dims(&mut r, 2, 10), u8::MAX as u16)
        };
        let n = dims[0] * dims[1] * dims[2];
        // two or three intensity modes with spread, sometimes degenerate
        let modes: Vec<u16> = (0..r.gen_range(1..=3))
            .map(|_| r.gen_range(0..=max))
            .collect();
        let spread = r.gen_range(0..=(max / 8).max(1));
        let values: Vec<u16> = (0..n)
            .map(|_| {
                let m = *modes.choose(&mut r).unwrap();
                let lo = m.saturating_sub(spread);
                let hi = m.saturating_add(spread).min(max);
                r.gen_range(lo..=hi)
            })
            .collect();
        let got = f(&values, dims, max);
        let want = otsu_exhaustive(&values, max);
        if got != want {
            return Err(fail("otsu", case, format!("got {got:?}, oracle {want:?}")));
        }
    }
    Ok(cases)
}

pub fn dilation(cases: usize, seed: u64, f: impl Fn(&[u8], Dims, usize) -> Vec<u8>) -> SuiteResult {
    let mut r = rng(seed);
    for case in 0..cases {
        let dims = random_dims(&mut r, 1, 12);
        let mut data = random_binary(&mut r, dims, false);
        // keep the volume sparse so dilation has room to grow
        for v in data.iter_mut() {
            if r.gen_bool(0.85) {
                *v = 0;
            }
        }
        let radius = r.gen_range(0..=3);
        if f(&data, dims, radius) != chebyshev_dilate(&data, dims, radius) {
            return Err(fail(
                "dilation",
                case,
                format!("dims {dims:?}, radius {radius}"),
            ));
        }
    }
    Ok(cases)
}

pub fn edt(cases: usize, seed: u64, f: impl Fn(&[u8], Dims) -> Vec<u64>) -> SuiteResult {
    let mut r = rng(seed);
    for case in 0..cases {
        let dims = random_dims(&mut r, 1, 12);
        let mut data = random_binary(&mut r, dims, case % 2 == 0);
        // mostly pore so distances get large
        for v in data.iter_mut() {
            if r.gen_bool(0.5) {
                *v = 1;
            }
        }
        let got = f(&data, dims);
        let want = edt_all_pairs(&data, dims);
        if got != want {
            let i = (0..got.len()).find(|&i| got[i] != want[i]).unwrap_or(0);
            return Err(fail(
                "edt",
                case,
                format!(
                    "dims {dims:?}, voxel {i}: got {}, oracle {}",
                    got.get(i).copied().unwrap_or(0),
                    want[i]
                ),
            ));
        }
    }
    Ok(cases)
}

pub fn s2(cases: usize, seed: u64, f: impl Fn(&[u8], Dims, usize) -> Vec<f64>) -> SuiteResult {
    let mut r = rng(seed);
    for case in 0..cases {
        let dims = random_dims(&mut r, 2, 16);
        let data = random_binary(&mut r, dims, case % 2 == 1);
        let max_lag = r.gen_range(0..dims.into_iter().min().unwrap());
        let got = f(&data, dims, max_lag);
        let want = s2_all_pairs(&data, dims, max_lag);
        if got != want {
            return Err(fail(
                "s2",
                case,
                format!("dims {dims:?}: got {got:?}, oracle {want:?}"),
            ));
        }
    }
    Ok(cases)
}

pub fn downsampling(
    cases: usize,
    seed: u64,
    f: impl Fn(&[u8], Dims, usize) -> (Vec<u8>, Dims),
) -> SuiteResult {
    let mut r = rng(seed);
    for case in 0..cases {
        let factor = r.gen_range(1..=4);
        let dims = random_dims(&mut r, factor, 14);
        let data = random_binary(&mut r, dims, case % 2 == 1);
        if f(&data, dims, factor) != downsample_naive(&data, dims, factor) {
            return Err(fail(
                "downsampling",
                case,
                format!("dims {dims:?}, factor {factor}"),
            ));
        }
    }
    Ok(cases)
}

/// `f` returns the dictionary as `(skeleton code, fills)` per class in class order.
pub fn epd_scan(
    cases: usize,
    seed: u64,
    f: impl Fn(&[u8], Dims) -> Vec<(u32, Vec<u128>)>,
) -> SuiteResult {
    let mut r = rng(seed);
    for case in 0..cases {
        let dims = random_dims(&mut r, 5, 10);
        let data = random_binary(&mut r, dims, case % 3 != 0);
        if f(&data, dims) != crate::epd_scan(&data, dims) {
            return Err(fail("epd_scan", case, format!("dims {dims:?}")));
        }
    }
    Ok(cases)
}

/// `f` gets the class codes and a query; it returns the minimal distance,
/// every class at that distance, and the class its tie-breaker chose.
pub fn skeleton_matching(
    cases: usize,
    seed: u64,
    f: impl Fn(&[u32], u32) -> (u32, Vec<usize>, usize),
) -> SuiteResult {
    let mut r = rng(seed);
    for case in 0..cases {
        // small dictionaries take the linear path, large ones the ball search
        let n = if case % 2 == 0 {
            r.gen_range(1..=64)
        } else {
            r.gen_range(65..=400)
        };
        let mut codes: Vec<u32> = Vec::with_capacity(n);
        while codes.len() < n {
            let c = if codes.is_empty() || r.gen_bool(0.5) {
                r.gen_range(0..1u32 << 27)
            } else {
                // near-duplicates of existing classes produce ties
                let base = *codes.choose(&mut r).unwrap();
                base ^ (1 << r.gen_range(0..27)) ^ (1 << r.gen_range(0..27))
            };
            if !codes.contains(&c) {
                codes.push(c);
            }
        }
        let query = match case % 3 {
            0 => r.gen_range(0..1u32 << 27),
            1 => *codes.choose(&mut r).unwrap(),
            _ => {
                let mut q = *codes.choose(&mut r).unwrap();
                for _ in 0..r.gen_range(1..=3) {
                    q ^= 1 << r.gen_range(0..27);
                }
                q
            }
        };
        let (d, set, chosen) = f(&codes, query);
        let (wd, wset) = nearest_linear(&codes, query);
        if d != wd || set != wset || !wset.contains(&chosen) {
            return Err(fail(
                "skeleton_matching",
                case,
                format!("got ({d}, {set:?}, {chosen}), oracle ({wd}, {wset:?})"),
            ));
        }
    }
    Ok(cases)
}

/// `f` gets the candidate fills and the committed mask/values; it returns
/// the best score, the chosen index and the number of tied candidates.
pub fn fill_selection(
    cases: usize,
    seed: u64,
    f: impl Fn(&[u128], u128, u128) -> (u32, usize, usize),
) -> SuiteResult {
    const MASK: u128 = (1 << 98) - 1;
    let mut r = rng(seed);
    for case in 0..cases {
        let n = r.gen_range(1..=40);
        let base: u128 = r.gen::<u128>() & MASK;
        let fills: Vec<u128> = (0..n)
            .map(|_| {
                let mut f = base;
                for _ in 0..r.gen_range(0..12) {
                    f ^= 1 << r.gen_range(0..98);
                }
                f
            })
            .collect();
        let density = r.gen_range(0.0..=1.0);
        let decided: Vec<Option<u8>> = (0..98)
            .map(|_| r.gen_bool(density).then(|| r.gen_range(0..=1u8)))
            .collect();
        let mut mask = 0u128;
        let mut values = 0u128;
        for (k, d) in decided.iter().enumerate() {
            if let Some(v) = d {
                mask |= 1 << k;
                values |= (*v as u128) << k;
            }
        }
        let (score, chosen, tied) = f(&fills, mask, values);
        let (ws, wset) = best_fills_linear(&fills, &decided);
        if score != ws || tied != wset.len() || !wset.contains(&chosen) {
            return Err(fail(
                "fill_selection",
                case,
                format!("got ({score}, {chosen}, {tied}), oracle ({ws}, {wset:?})"),
            ));
        }
    }
    Ok(cases)
}

/// `f` gets the volume, connectivity and the size range.
pub fn micropores(
    cases: usize,
    seed: u64,
    f: impl Fn(&[u8], Dims, bool, usize, usize) -> Vec<(Dims, Vec<u8>)>,
) -> SuiteResult {
    let mut r = rng(seed);
    for case in 0..cases {
        let dims = random_dims(&mut r, 3, 14);
        let data = random_binary(&mut r, dims, case % 2 == 0);
        let lo = r.gen_range(1..=4);
        let hi = r.gen_range(lo..=lo + 30);
        let full = case % 3 != 0;
        if f(&data, dims, full, lo, hi) != micropore_elements(&data, dims, full, lo, hi) {
            return Err(fail(
                "micropores",
                case,
                format!("dims {dims:?}, range [{lo}, {hi}]"),
            ));
        }
    }
    Ok(cases)
}

/// `f` returns the component-size histogram as sorted `(size, count)` pairs.
pub fn cc_histograms(
    cases: usize,
    seed: u64,
    f: impl Fn(&[u8], Dims, bool) -> Vec<(usize, usize)>,
) -> SuiteResult {
    let mut r = rng(seed);
    for case in 0..cases {
        let dims = random_dims(&mut r, 1, 16);
        let data = random_binary(&mut r, dims, case % 2 == 0);
        let full = case % 2 == 0;
        let mut want: Vec<(usize, usize)> = cc_histogram(&data, dims, full).into_iter().collect();
        want.sort_unstable();
        if f(&data, dims, full) != want {
            return Err(fail("cc_histograms", case, format!("dims {dims:?}")));
        }
    }
    Ok(cases)
}

/// `f` returns the covering radius of each component (label order) at `scale`.
pub fn component_radii(
    cases: usize,
    seed: u64,
    f: impl Fn(&[u8], Dims, f64) -> Vec<f64>,
) -> SuiteResult {
    let mut r = rng(seed);
    for case in 0..cases {
        let dims = random_dims(&mut r, 1, 12);
        let data = random_binary(&mut r, dims, case % 2 == 0);
        let scale = r.gen_range(0.5..5.0);
        let want: Vec<f64> = component_max_edt(&data, dims, true)
            .into_iter()
            .map(|d| (d as f64).sqrt() * scale)
            .collect();
        if f(&data, dims, scale) != want {
            return Err(fail("component_radii", case, format!("dims {dims:?}")));
        }
    }
    Ok(cases)
}

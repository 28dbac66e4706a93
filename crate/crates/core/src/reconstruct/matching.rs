//! Two-step matching: nearest skeleton class by Hamming distance, then the
//! class fill that best agrees with voxels already committed by neighbours.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::dictionary::codes::SKELETON_BITS;
use crate::dictionary::{EdgeFill, EdgePatternDictionary, SkeletonCode};
use crate::error::{Error, Result};
use crate::reconstruct::{stream_rng, TieBreak, EDGE_STREAM};

/// Resolves ties among equally scored candidates.
#[derive(Debug, Clone)]
pub struct TieBreaker {
    mode: TieBreak,
    rng: ChaCha8Rng,
}

impl TieBreaker {
    pub fn new(mode: TieBreak, seed: u64) -> Self {
        TieBreaker {
            mode,
            rng: stream_rng(seed, EDGE_STREAM),
        }
    }

    pub fn mode(&self) -> TieBreak {
        self.mode
    }

    /// Index into `n` tied candidates. Draws only when `n > 1` in seeded-random mode.
    pub fn choose(&mut self, n: usize) -> usize {
        match self.mode {
            _ if n <= 1 => 0,
            TieBreak::First => 0,
            TieBreak::SeededRandom => self.rng.gen_range(0..n),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SkeletonMatch {
    pub class: usize,
    pub distance: u32,
    /// Number of classes at the minimal distance.
    pub candidates: usize,
}

/// Minimal Hamming distance from `code` to any class, and every class at that
/// distance in ascending class order.
pub fn nearest_classes(
    code: SkeletonCode,
    epd: &EdgePatternDictionary,
) -> Result<(u32, Vec<usize>)> {
    if epd.is_empty() {
        return Err(Error::EmptyDictionary);
    }
    if let Some(c) = epd.class_of(code) {
        return Ok((0, vec![c]));
    }
    let bits = code.bits();
    let probe = |b: u32| SkeletonCode::new(b).ok().and_then(|c| epd.class_of(c));

    // Hamming balls of radius 1 and 2 are cheaper than a scan of a large dictionary.
    if epd.class_count() > 64 {
        let mut hits: Vec<usize> = (0..SKELETON_BITS)
            .filter_map(|i| probe(bits ^ (1 << i)))
            .collect();
        if hits.is_empty() {
            for i in 0..SKELETON_BITS {
                for j in i + 1..SKELETON_BITS {
                    if let Some(c) = probe(bits ^ (1 << i) ^ (1 << j)) {
                        hits.push(c);
                    }
                }
            }
            if !hits.is_empty() {
                hits.sort_unstable();
                return Ok((2, hits));
            }
        } else {
            hits.sort_unstable();
            return Ok((1, hits));
        }
    }

    let mut best = u32::MAX;
    let mut classes = Vec::new();
    for (i, c) in epd.codes().iter().enumerate() {
        let d = (c.bits() ^ bits).count_ones();
        if d < best {
            best = d;
            classes.clear();
        }
        if d == best {
            classes.push(i);
        }
    }
    Ok((best, classes))
}

pub fn match_skeleton(
    code: SkeletonCode,
    epd: &EdgePatternDictionary,
    tie: &mut TieBreaker,
) -> Result<SkeletonMatch> {
    let (distance, classes) = nearest_classes(code, epd)?;
    let pick = tie.choose(classes.len());
    Ok(SkeletonMatch {
        class: classes[pick],
        distance,
        candidates: classes.len(),
    })
}

/// Pending voxels of a block already committed by earlier blocks: bit `k`
/// of `mask` is set when pending position `k` is decided, and bit `k` of
/// `values` holds its phase.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct BlockContext {
    mask: u128,
    values: u128,
}

impl BlockContext {
    pub fn new(mask: u128, values: u128) -> Self {
        BlockContext {
            mask: mask & EdgeFill::MASK,
            values: values & mask & EdgeFill::MASK,
        }
    }

    pub fn mask(&self) -> u128 {
        self.mask
    }

    pub fn values(&self) -> u128 {
        self.values
    }

    pub fn committed(&self) -> u32 {
        self.mask.count_ones()
    }
}

/// Sum of absolute differences between a candidate fill and the committed voxels.
#[inline]
pub fn fill_score(fill: EdgeFill, ctx: &BlockContext) -> u32 {
    ((fill.bits() ^ ctx.values) & ctx.mask).count_ones()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FillChoice {
    /// Index into the candidate list.
    pub index: usize,
    pub score: u32,
    pub candidates: usize,
}

pub fn select_edge_fill(
    fills: &[EdgeFill],
    ctx: &BlockContext,
    tie: &mut TieBreaker,
) -> Result<FillChoice> {
    if fills.is_empty() {
        return Err(Error::EmptyDictionary);
    }
    let mut best = u32::MAX;
    let mut tied: Vec<usize> = Vec::new();
    for (j, &f) in fills.iter().enumerate() {
        let s = fill_score(f, ctx);
        if s < best {
            best = s;
            tied.clear();
        }
        if s == best {
            tied.push(j);
        }
    }
    let pick = tie.choose(tied.len());
    Ok(FillChoice {
        index: tied[pick],
        score: best,
        candidates: tied.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn code(bits: u32) -> SkeletonCode {
        SkeletonCode::new(bits).unwrap()
    }

    fn fill(bits: u128) -> EdgeFill {
        EdgeFill::new(bits).unwrap()
    }

    #[test]
    fn exact_hit() {
        let epd = EdgePatternDictionary::from_classes(
            1,
            1.0,
            [(code(5), vec![fill(0)]), (code(9), vec![fill(1)])],
        )
        .unwrap();
        let mut tb = TieBreaker::new(TieBreak::SeededRandom, 3);
        let m = match_skeleton(code(9), &epd, &mut tb).unwrap();
        assert_eq!((m.class, m.distance, m.candidates), (1, 0, 1));
    }

    #[test]
    fn majority_class() {
        let epd = EdgePatternDictionary::from_classes(
            1,
            1.0,
            [
                (code(0), vec![fill(0)]),
                (code(SkeletonCode::MASK), vec![fill(1)]),
            ],
        )
        .unwrap();
        let mut tb = TieBreaker::new(TieBreak::First, 0);
        let m = match_skeleton(code(0b11111), &epd, &mut tb).unwrap();
        assert_eq!((m.class, m.distance), (0, 5));
    }

    #[test]
    fn empty_inputs() {
        let epd = EdgePatternDictionary::from_classes(1, 1.0, []).unwrap();
        let mut tb = TieBreaker::new(TieBreak::First, 0);
        assert!(matches!(
            match_skeleton(code(0), &epd, &mut tb),
            Err(Error::EmptyDictionary)
        ));
        assert!(matches!(
            select_edge_fill(&[], &BlockContext::default(), &mut tb),
            Err(Error::EmptyDictionary)
        ));
    }

    #[test]
    fn vacuous_context_ties_everything() {
        let fills: Vec<EdgeFill> = (0..6).map(fill).collect();
        let ctx = BlockContext::default();
        let mut first = TieBreaker::new(TieBreak::First, 0);
        let c = select_edge_fill(&fills, &ctx, &mut first).unwrap();
        assert_eq!((c.index, c.score, c.candidates), (0, 0, 6));
        let picks: Vec<usize> = (0..2)
            .map(|_| {
                let mut tb = TieBreaker::new(TieBreak::SeededRandom, 11);
                select_edge_fill(&fills, &ctx, &mut tb).unwrap().index
            })
            .collect();
        assert_eq!(picks[0], picks[1]);
    }

    #[test]
    fn strict_dominance() {
        // committed: positions 0..4 all pore
        let ctx = BlockContext::new(0b1111, 0b1111);
        let good = fill(0b1111);
        let bad = fill(0b1000);
        let mut tb = TieBreaker::new(TieBreak::SeededRandom, 1);
        let c = select_edge_fill(&[bad, good], &ctx, &mut tb).unwrap();
        assert_eq!((c.index, c.score), (1, 0));
        assert_eq!(fill_score(bad, &ctx), 3);
    }

    #[test]
    fn ball_search_agrees_with_scan() {
        // >64 classes so the ball path is exercised
        let classes: Vec<(SkeletonCode, Vec<EdgeFill>)> = (0..200u32)
            .map(|i| (code(i * 7919 % (1 << 27)), vec![fill(i as u128)]))
            .collect();
        let epd = EdgePatternDictionary::from_classes(1, 1.0, classes).unwrap();
        for q in [1u32, 2, 3, 12345, 7919 ^ 0b11, 0x7ff_ffff] {
            let (d, c) = nearest_classes(code(q), &epd).unwrap();
            let best = epd
                .codes()
                .iter()
                .map(|k| k.hamming(code(q)))
                .min()
                .unwrap();
            let all: Vec<usize> = (0..epd.class_count())
                .filter(|&i| epd.codes()[i].hamming(code(q)) == best)
                .collect();
            assert_eq!((d, c), (best, all));
        }
    }
}

//! Edge-pattern dictionaries.
//!
//! Every 5³ window of the (level-downsampled) HR volume contributes one
//! `(skeleton, fill)` pair. Pairs are grouped by skeleton code into classes;
//! duplicate fills inside a class are dropped. Classes and fills keep the
//! order in which a raster scan of window offsets first meets them.
//!
//! File layout (little-endian):
//!
//! | field        | type        |
//! |--------------|-------------|
//! | magic        | `b"MEPD"`   |
//! | version      | u32 (= 1)   |
//! | level        | u32         |
//! | source scale | f64, µm     |
//! | class count  | u32         |
//! | per class    | code u32, fill count u32, fills as u128 each |

use std::collections::{HashMap, HashSet};
use std::fs;
use std::path::Path;

use crate::dictionary::codes::{
    EdgeFill, SkeletonCode, BLOCK, PENDING_POSITIONS, SKELETON_POSITIONS,
};
use crate::error::{Error, Result};
use crate::plan::ScalePlan;
use crate::resample::downsample_binary;
use crate::volume::{linear_index, BinaryVolume, Dims};

const MAGIC: &[u8; 4] = b"MEPD";
const VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct EdgePatternDictionary {
    level: u32,
    source_scale: f64,
    codes: Vec<SkeletonCode>,
    fills: Vec<Vec<EdgeFill>>,
    index: HashMap<SkeletonCode, usize>,
}

impl EdgePatternDictionary {
    fn empty(level: u32, source_scale: f64) -> Self {
        EdgePatternDictionary {
            level,
            source_scale,
            codes: Vec::new(),
            fills: Vec::new(),
            index: HashMap::new(),
        }
    }

    /// Builds a dictionary from explicit classes. Fills are deduplicated per
    /// class; repeated codes are merged in order.
    pub fn from_classes(
        level: u32,
        source_scale: f64,
        classes: impl IntoIterator<Item = (SkeletonCode, Vec<EdgeFill>)>,
    ) -> Result<Self> {
        if level == 0 {
            return Err(Error::InvalidInput("dictionary level must be ≥ 1".into()));
        }
        let mut d = EdgePatternDictionary::empty(level, source_scale);
        let mut seen = HashSet::new();
        for (code, fills) in classes {
            let class = d.class_slot(code);
            for f in fills {
                if seen.insert((code, f)) {
                    d.fills[class].push(f);
                }
            }
        }
        if d.fills.iter().any(Vec::is_empty) {
            return Err(Error::InvalidInput("dictionary class without fills".into()));
        }
        Ok(d)
    }

    fn class_slot(&mut self, code: SkeletonCode) -> usize {
        *self.index.entry(code).or_insert_with(|| {
            self.codes.push(code);
            self.fills.push(Vec::new());
            self.codes.len() - 1
        })
    }

    /// 1 = native HR scale; level `k` was built from the HR volume downsampled by `2^(k-1)`.
    pub fn level(&self) -> u32 {
        self.level
    }

    /// Voxel scale (µm) of the volume the patterns were read from.
    pub fn source_scale(&self) -> f64 {
        self.source_scale
    }

    pub fn class_count(&self) -> usize {
        self.codes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codes.is_empty()
    }

    pub fn codes(&self) -> &[SkeletonCode] {
        &self.codes
    }

    pub fn fills(&self, class: usize) -> &[EdgeFill] {
        &self.fills[class]
    }

    pub fn class_of(&self, code: SkeletonCode) -> Option<usize> {
        self.index.get(&code).copied()
    }

    pub fn fill_count(&self) -> usize {
        self.fills.iter().map(Vec::len).sum()
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(24 + self.codes.len() * 8 + self.fill_count() * 16);
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&VERSION.to_le_bytes());
        out.extend_from_slice(&self.level.to_le_bytes());
        out.extend_from_slice(&self.source_scale.to_le_bytes());
        out.extend_from_slice(&(self.codes.len() as u32).to_le_bytes());
        for (code, fills) in self.codes.iter().zip(&self.fills) {
            out.extend_from_slice(&code.bits().to_le_bytes());
            out.extend_from_slice(&(fills.len() as u32).to_le_bytes());
            for f in fills {
                out.extend_from_slice(&f.bits().to_le_bytes());
            }
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader { bytes, pos: 0 };
        if r.take(4)? != MAGIC {
            return Err(Error::Format("bad edge dictionary magic".into()));
        }
        let version = r.u32()?;
        if version != VERSION {
            return Err(Error::Format(format!("unsupported version {version}")));
        }
        let level = r.u32()?;
        let scale = f64::from_le_bytes(r.take(8)?.try_into().unwrap());
        let classes = r.u32()? as usize;
        let mut parsed = Vec::with_capacity(classes);
        for _ in 0..classes {
            let code = SkeletonCode::new(r.u32()?)?;
            let n = r.u32()? as usize;
            let mut fills = Vec::with_capacity(n);
            for _ in 0..n {
                let bits = u128::from_le_bytes(r.take(16)?.try_into().unwrap());
                fills.push(EdgeFill::new(bits)?);
            }
            parsed.push((code, fills));
        }
        if r.pos != bytes.len() {
            return Err(Error::Format("trailing bytes after dictionary".into()));
        }
        let d = EdgePatternDictionary::from_classes(level, scale, parsed)?;
        if d.class_count() != classes {
            return Err(Error::Format("duplicate classes in dictionary file".into()));
        }
        Ok(d)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_bytes()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        EdgePatternDictionary::from_bytes(&bytes)
    }
}

pub(crate) struct Reader<'a> {
    pub(crate) bytes: &'a [u8],
    pub(crate) pos: usize,
}

impl<'a> Reader<'a> {
    pub(crate) fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos + n;
        let s = self
            .bytes
            .get(self.pos..end)
            .ok_or_else(|| Error::Format("unexpected end of file".into()))?;
        self.pos = end;
        Ok(s)
    }

    pub(crate) fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }
}

/// Global index offsets of the skeleton and pending positions of a 5³
/// window anchored at the origin of a volume with `dims`.
pub(crate) fn window_offsets(dims: Dims, step: usize) -> ([usize; 27], [usize; 98]) {
    let off = |local: usize| {
        let [x, y, z] = crate::dictionary::codes::local_coords(local);
        linear_index(dims, x * step, y * step, z * step)
    };
    (SKELETON_POSITIONS.map(off), PENDING_POSITIONS.map(off))
}

/// Scans every 5³ window (stride 1) of `hr` downsampled by `2^(level-1)`.
pub fn build_epd(hr: &BinaryVolume, level: u32) -> Result<EdgePatternDictionary> {
    if level == 0 {
        return Err(Error::InvalidInput("dictionary level must be ≥ 1".into()));
    }
    let factor = 1usize << (level - 1);
    if hr.dims().iter().any(|&d| d / factor < BLOCK) {
        return Err(Error::TooSmall(format!(
            "HR dims {:?} at level {level} are below the {BLOCK}³ template",
            hr.dims()
        )));
    }
    let source = downsample_binary(hr, factor)?;
    let dims = source.dims();
    let data = source.data();
    let (skel, pend) = window_offsets(dims, 1);

    let mut dict = EdgePatternDictionary::empty(level, source.scale());
    let mut seen: HashSet<(u32, u128)> = HashSet::new();
    for z in 0..=dims[2] - BLOCK {
        for y in 0..=dims[1] - BLOCK {
            for x in 0..=dims[0] - BLOCK {
                let base = linear_index(dims, x, y, z);
                let mut code = 0u32;
                for (k, &o) in skel.iter().enumerate() {
                    code |= (data[base + o] as u32) << k;
                }
                let mut fill = 0u128;
                for (k, &o) in pend.iter().enumerate() {
                    fill |= (data[base + o] as u128) << k;
                }
                if seen.insert((code, fill)) {
                    let class = dict.class_slot(SkeletonCode::new(code)?);
                    dict.fills[class].push(EdgeFill::new(fill)?);
                }
            }
        }
    }
    log::info!(
        "edge dictionary level {level}: {} classes, {} fills",
        dict.class_count(),
        dict.fill_count()
    );
    Ok(dict)
}

/// Dictionaries for levels `m_max` down to 1, coarsest first.
pub fn build_multi_epd(hr: &BinaryVolume, plan: &ScalePlan) -> Result<Vec<EdgePatternDictionary>> {
    (1..=plan.m_max)
        .rev()
        .map(|level| build_epd(hr, level))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::volume::{PORE, ROCK};

    #[test]
    fn uniform_volumes_give_single_pattern() {
        for value in [ROCK, PORE] {
            let v = BinaryVolume::filled([8, 8, 8], 1.0, value).unwrap();
            let d = build_epd(&v, 1).unwrap();
            assert_eq!(d.class_count(), 1);
            assert_eq!(d.fills(0).len(), 1);
            let expect_code = if value == PORE { SkeletonCode::MASK } else { 0 };
            let expect_fill = if value == PORE { EdgeFill::MASK } else { 0 };
            assert_eq!(d.codes()[0].bits(), expect_code);
            assert_eq!(d.fills(0)[0].bits(), expect_fill);
        }
    }

    #[test]
    fn too_small_volume() {
        let v = BinaryVolume::filled([4, 8, 8], 1.0, 0).unwrap();
        assert!(matches!(build_epd(&v, 1), Err(Error::TooSmall(_))));
        let v = BinaryVolume::filled([9, 9, 9], 1.0, 0).unwrap();
        assert!(matches!(build_epd(&v, 2), Err(Error::TooSmall(_))));
        assert!(build_epd(&v, 0).is_err());
    }

    #[test]
    fn byte_roundtrip_and_corruption() {
        let v = BinaryVolume::from_fn([7, 6, 5], 2.0, |x, y, z| (x * 3 + y * 5 + z * 7) % 4 == 0)
            .unwrap();
        let d = build_epd(&v, 1).unwrap();
        let bytes = d.to_bytes();
        assert_eq!(EdgePatternDictionary::from_bytes(&bytes).unwrap(), d);
        assert!(EdgePatternDictionary::from_bytes(&bytes[..bytes.len() - 1]).is_err());
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(matches!(
            EdgePatternDictionary::from_bytes(&bad),
            Err(Error::Format(_))
        ));
    }

    #[test]
    fn from_classes_dedups() {
        let c = SkeletonCode::new(3).unwrap();
        let f = EdgeFill::new(9).unwrap();
        let d =
            EdgePatternDictionary::from_classes(1, 1.0, [(c, vec![f, f]), (c, vec![f])]).unwrap();
        assert_eq!(d.class_count(), 1);
        assert_eq!(d.fills(0), &[f]);
    }
}

//! Micro-pore dictionary: small pore components of the HR volume, each kept
//! as the binary mask of its tight bounding box.
//!
//! File layout (little-endian): `b"MMPD"`, version u32, connectivity u8,
//! source scale f64, element count u32, then per element dims `3 × u32`,
//! voxel count u32 and the mask bytes (x fastest).

use std::fs;
use std::path::Path;

use crate::dictionary::epd::Reader;
use crate::error::{Error, Result};
use crate::label::label_components;
use crate::plan::ScalePlan;
use crate::volume::{coords, voxel_count, BinaryVolume, Connectivity, Dims, PORE};

const MAGIC: &[u8; 4] = b"MMPD";
const VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MicroPore {
    dims: Dims,
    mask: Vec<u8>,
    voxels: usize,
}

impl MicroPore {
    pub fn new(dims: Dims, mask: Vec<u8>) -> Result<Self> {
        if dims.contains(&0) || mask.len() != voxel_count(dims) {
            return Err(Error::InvalidInput(format!(
                "micro-pore mask of {} voxels does not fit dims {dims:?}",
                mask.len()
            )));
        }
        if mask.iter().any(|&v| v > PORE) {
            return Err(Error::UnknownEncoding("micro-pore mask must be 0/1".into()));
        }
        let voxels = mask.iter().filter(|&&v| v == PORE).count();
        Ok(MicroPore { dims, mask, voxels })
    }

    /// Bounding-box extent.
    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn mask(&self) -> &[u8] {
        &self.mask
    }

    pub fn voxel_count(&self) -> usize {
        self.voxels
    }

    /// Offsets of the pore voxels relative to the bounding-box min corner.
    pub fn offsets(&self) -> impl Iterator<Item = [usize; 3]> + '_ {
        self.mask
            .iter()
            .enumerate()
            .filter(|(_, &v)| v == PORE)
            .map(|(i, _)| coords(self.dims, i))
    }

    pub fn to_volume(&self, scale: f64) -> Result<BinaryVolume> {
        BinaryVolume::new(self.dims, scale, self.mask.clone())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MicroPoreDictionary {
    elements: Vec<MicroPore>,
    source_scale: f64,
    connectivity: Connectivity,
}

impl MicroPoreDictionary {
    pub fn new(elements: Vec<MicroPore>, source_scale: f64, connectivity: Connectivity) -> Self {
        MicroPoreDictionary {
            elements,
            source_scale,
            connectivity,
        }
    }

    pub fn elements(&self) -> &[MicroPore] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn source_scale(&self) -> f64 {
        self.source_scale
    }

    pub fn connectivity(&self) -> Connectivity {
        self.connectivity
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&VERSION.to_le_bytes());
        out.push(u8::from(self.connectivity));
        out.extend_from_slice(&self.source_scale.to_le_bytes());
        out.extend_from_slice(&(self.elements.len() as u32).to_le_bytes());
        for e in &self.elements {
            for d in e.dims {
                out.extend_from_slice(&(d as u32).to_le_bytes());
            }
            out.extend_from_slice(&(e.voxels as u32).to_le_bytes());
            out.extend_from_slice(&e.mask);
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader { bytes, pos: 0 };
        if r.take(4)? != MAGIC {
            return Err(Error::Format("bad micro-pore dictionary magic".into()));
        }
        let version = r.u32()?;
        if version != VERSION {
            return Err(Error::Format(format!("unsupported version {version}")));
        }
        let connectivity = Connectivity::try_from(r.take(1)?[0]).map_err(Error::Format)?;
        let scale = f64::from_le_bytes(r.take(8)?.try_into().unwrap());
        let n = r.u32()? as usize;
        let mut elements = Vec::with_capacity(n.min(1 << 20));
        for _ in 0..n {
            let dims = [r.u32()? as usize, r.u32()? as usize, r.u32()? as usize];
            let voxels = r.u32()? as usize;
            let mask = r.take(voxel_count(dims))?.to_vec();
            let e = MicroPore::new(dims, mask)?;
            if e.voxels != voxels {
                return Err(Error::Format("micro-pore voxel count mismatch".into()));
            }
            elements.push(e);
        }
        if r.pos != bytes.len() {
            return Err(Error::Format("trailing bytes after dictionary".into()));
        }
        Ok(MicroPoreDictionary::new(elements, scale, connectivity))
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_bytes()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        MicroPoreDictionary::from_bytes(&bytes)
    }
}

/// Collects every pore component of `hr` whose voxel count lies in
/// `plan.cc_range`, in label order.
pub fn build_mpd(
    hr: &BinaryVolume,
    plan: &ScalePlan,
    connectivity: Connectivity,
) -> MicroPoreDictionary {
    let labels = label_components(hr, connectivity);
    let sizes = labels.sizes();
    let boxes = labels.bounding_boxes();
    let mut elements = Vec::new();
    for (i, (&size, &(lo, hi))) in sizes.iter().zip(&boxes).enumerate() {
        if !plan.cc_contains(size) {
            continue;
        }
        let label = i as u32 + 1;
        let dims = [0, 1, 2].map(|a| hi[a] - lo[a] + 1);
        let full = hr.dims();
        let mut mask = Vec::with_capacity(voxel_count(dims));
        for z in 0..dims[2] {
            for y in 0..dims[1] {
                for x in 0..dims[0] {
                    let idx = crate::volume::linear_index(full, lo[0] + x, lo[1] + y, lo[2] + z);
                    mask.push((labels.labels()[idx] == label) as u8);
                }
            }
        }
        elements.push(MicroPore::new(dims, mask).expect("mask built from bounding box"));
    }
    if elements.is_empty() {
        log::warn!(
            "micro-pore dictionary is empty (no components in {:?})",
            plan.cc_range
        );
    }
    MicroPoreDictionary::new(elements, hr.scale(), connectivity)
}

//! Voxel volume types.
//!
//! All volumes use a linear layout with x fastest, then y, then z:
//! `index = x + y * nx + z * nx * ny`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Voxel counts per axis, `[nx, ny, nz]`.
pub type Dims = [usize; 3];

pub const ROCK: u8 = 0;
pub const PORE: u8 = 1;

#[inline]
pub fn voxel_count(dims: Dims) -> usize {
    dims[0] * dims[1] * dims[2]
}

#[inline]
pub fn linear_index(dims: Dims, x: usize, y: usize, z: usize) -> usize {
    x + dims[0] * (y + dims[1] * z)
}

/// Inverse of [`linear_index`].
#[inline]
pub fn coords(dims: Dims, idx: usize) -> [usize; 3] {
    let x = idx % dims[0];
    let yz = idx / dims[0];
    [x, yz % dims[1], yz / dims[1]]
}

fn check_dims(dims: Dims) -> Result<()> {
    if dims.contains(&0) {
        return Err(Error::InvalidInput(format!(
            "dims must be positive, got {dims:?}"
        )));
    }
    Ok(())
}

fn check_scale(scale: f64) -> Result<()> {
    if !(scale.is_finite() && scale > 0.0) {
        return Err(Error::InvalidInput(format!(
            "voxel scale must be positive, got {scale}"
        )));
    }
    Ok(())
}

/// Voxel adjacency used for connected components.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum Connectivity {
    /// Face neighbours only.
    Six,
    /// Faces, edges and corners.
    #[default]
    TwentySix,
}

impl Connectivity {
    /// Neighbour offsets that precede the current voxel in raster order.
    pub(crate) fn backward_offsets(self) -> &'static [[i32; 3]] {
        const SIX: [[i32; 3]; 3] = [[-1, 0, 0], [0, -1, 0], [0, 0, -1]];
        const TWENTY_SIX: [[i32; 3]; 13] = [
            [-1, 0, 0],
            [-1, -1, 0],
            [0, -1, 0],
            [1, -1, 0],
            [-1, -1, -1],
            [0, -1, -1],
            [1, -1, -1],
            [-1, 0, -1],
            [0, 0, -1],
            [1, 0, -1],
            [-1, 1, -1],
            [0, 1, -1],
            [1, 1, -1],
        ];
        match self {
            Connectivity::Six => &SIX,
            Connectivity::TwentySix => &TWENTY_SIX,
        }
    }

    pub fn neighbour_offsets(self) -> Vec<[i32; 3]> {
        let mut out = Vec::new();
        for dz in -1..=1i32 {
            for dy in -1..=1i32 {
                for dx in -1..=1i32 {
                    let manhattan = dx.abs() + dy.abs() + dz.abs();
                    let keep = match self {
                        Connectivity::Six => manhattan == 1,
                        Connectivity::TwentySix => manhattan > 0,
                    };
                    if keep {
                        out.push([dx, dy, dz]);
                    }
                }
            }
        }
        out
    }
}

impl TryFrom<u8> for Connectivity {
    type Error = String;

    fn try_from(v: u8) -> std::result::Result<Self, Self::Error> {
        match v {
            6 => Ok(Connectivity::Six),
            26 => Ok(Connectivity::TwentySix),
            other => Err(format!("connectivity must be 6 or 26, got {other}")),
        }
    }
}

impl From<Connectivity> for u8 {
    fn from(c: Connectivity) -> u8 {
        match c {
            Connectivity::Six => 6,
            Connectivity::TwentySix => 26,
        }
    }
}

impl std::fmt::Display for Connectivity {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", u8::from(*self))
    }
}

impl std::str::FromStr for Connectivity {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let v: u8 = s
            .trim()
            .parse()
            .map_err(|_| format!("connectivity must be 6 or 26, got {s:?}"))?;
        Connectivity::try_from(v)
    }
}

/// Two-phase volume: 0 = rock, 1 = pore. Isotropic voxels of `scale` µm.
#[derive(Debug, Clone, PartialEq)]
pub struct BinaryVolume {
    dims: Dims,
    scale: f64,
    data: Vec<u8>,
}

impl BinaryVolume {
    pub fn new(dims: Dims, scale: f64, data: Vec<u8>) -> Result<Self> {
        check_dims(dims)?;
        check_scale(scale)?;
        let expected = voxel_count(dims);
        if data.len() != expected {
            return Err(Error::DataLength {
                expected,
                actual: data.len(),
            });
        }
        if let Some(bad) = data.iter().find(|&&v| v > PORE) {
            return Err(Error::UnknownEncoding(format!(
                "binary voxel value {bad} is neither 0 nor 1"
            )));
        }
        Ok(BinaryVolume { dims, scale, data })
    }

    pub fn filled(dims: Dims, scale: f64, value: u8) -> Result<Self> {
        BinaryVolume::new(dims, scale, vec![value.min(PORE); voxel_count(dims)])
    }

    /// Builds a volume from a per-voxel predicate on `(x, y, z)`.
    pub fn from_fn(
        dims: Dims,
        scale: f64,
        mut f: impl FnMut(usize, usize, usize) -> bool,
    ) -> Result<Self> {
        check_dims(dims)?;
        let mut data = Vec::with_capacity(voxel_count(dims));
        for z in 0..dims[2] {
            for y in 0..dims[1] {
                for x in 0..dims[0] {
                    data.push(f(x, y, z) as u8);
                }
            }
        }
        BinaryVolume::new(dims, scale, data)
    }

    pub(crate) fn from_parts_unchecked(dims: Dims, scale: f64, data: Vec<u8>) -> Self {
        debug_assert_eq!(data.len(), voxel_count(dims));
        debug_assert!(data.iter().all(|&v| v <= PORE));
        BinaryVolume { dims, scale, data }
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    /// Voxel edge length in µm.
    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn into_data(self) -> Vec<u8> {
        self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn index(&self, x: usize, y: usize, z: usize) -> usize {
        linear_index(self.dims, x, y, z)
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize, z: usize) -> u8 {
        self.data[self.index(x, y, z)]
    }

    #[inline]
    pub fn is_pore(&self, x: usize, y: usize, z: usize) -> bool {
        self.get(x, y, z) == PORE
    }

    pub fn pore_count(&self) -> usize {
        self.data.iter().filter(|&&v| v == PORE).count()
    }

    pub fn with_scale(mut self, scale: f64) -> Result<Self> {
        check_scale(scale)?;
        self.scale = scale;
        Ok(self)
    }

    /// Field of view per axis in µm.
    pub fn fov(&self) -> [f64; 3] {
        self.dims.map(|d| d as f64 * self.scale)
    }

    /// Copies the sub-volume starting at `origin` with extent `size`.
    pub fn crop(&self, origin: [usize; 3], size: Dims) -> Result<Self> {
        for a in 0..3 {
            if size[a] == 0 || origin[a] + size[a] > self.dims[a] {
                return Err(Error::InvalidInput(format!(
                    "crop {origin:?}+{size:?} exceeds volume {:?}",
                    self.dims
                )));
            }
        }
        let mut data = Vec::with_capacity(voxel_count(size));
        for z in 0..size[2] {
            for y in 0..size[1] {
                let start = self.index(origin[0], origin[1] + y, origin[2] + z);
                data.extend_from_slice(&self.data[start..start + size[0]]);
            }
        }
        Ok(BinaryVolume::from_parts_unchecked(size, self.scale, data))
    }

    /// Every `step`-th voxel along each axis, starting at the origin.
    pub fn subsample(&self, step: usize) -> Result<Self> {
        if step == 0 {
            return Err(Error::InvalidInput("subsample step must be ≥ 1".into()));
        }
        let dims = self.dims.map(|d| (d - 1) / step + 1);
        let mut data = Vec::with_capacity(voxel_count(dims));
        for z in 0..dims[2] {
            for y in 0..dims[1] {
                for x in 0..dims[0] {
                    data.push(self.get(x * step, y * step, z * step));
                }
            }
        }
        Ok(BinaryVolume::from_parts_unchecked(
            dims,
            self.scale * step as f64,
            data,
        ))
    }

    /// Grows the volume to `target` dims by replicating the last plane of each axis.
    pub fn replicate_to(&self, target: Dims) -> Result<Self> {
        if (0..3).any(|a| target[a] < self.dims[a]) {
            return Err(Error::InvalidInput(format!(
                "cannot replicate {:?} down to {target:?}",
                self.dims
            )));
        }
        let [nx, ny, nz] = self.dims;
        Ok(BinaryVolume::from_parts_unchecked(
            target,
            self.scale,
            (0..voxel_count(target))
                .map(|i| {
                    let [x, y, z] = coords(target, i);
                    self.get(x.min(nx - 1), y.min(ny - 1), z.min(nz - 1))
                })
                .collect(),
        ))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BitDepth {
    Eight,
    Sixteen,
}

impl BitDepth {
    pub fn max_value(self) -> u16 {
        match self {
            BitDepth::Eight => u8::MAX as u16,
            BitDepth::Sixteen => u16::MAX,
        }
    }
}

/// Grayscale intensity volume (8- or 16-bit).
#[derive(Debug, Clone, PartialEq)]
pub struct GrayVolume {
    dims: Dims,
    scale: f64,
    depth: BitDepth,
    data: Vec<u16>,
}

impl GrayVolume {
    pub fn new(dims: Dims, scale: f64, depth: BitDepth, data: Vec<u16>) -> Result<Self> {
        check_dims(dims)?;
        check_scale(scale)?;
        let expected = voxel_count(dims);
        if data.len() != expected {
            return Err(Error::DataLength {
                expected,
                actual: data.len(),
            });
        }
        let max = depth.max_value();
        if let Some(bad) = data.iter().find(|&&v| v > max) {
            return Err(Error::InvalidInput(format!(
                "intensity {bad} exceeds {depth:?} range"
            )));
        }
        Ok(GrayVolume {
            dims,
            scale,
            depth,
            data,
        })
    }

    pub fn from_u8(dims: Dims, scale: f64, data: &[u8]) -> Result<Self> {
        GrayVolume::new(
            dims,
            scale,
            BitDepth::Eight,
            data.iter().map(|&v| v as u16).collect(),
        )
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn depth(&self) -> BitDepth {
        self.depth
    }

    pub fn data(&self) -> &[u16] {
        &self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize, z: usize) -> u16 {
        self.data[linear_index(self.dims, x, y, z)]
    }

    pub fn crop(&self, origin: [usize; 3], size: Dims) -> Result<Self> {
        for a in 0..3 {
            if size[a] == 0 || origin[a] + size[a] > self.dims[a] {
                return Err(Error::InvalidInput(format!(
                    "crop {origin:?}+{size:?} exceeds volume {:?}",
                    self.dims
                )));
            }
        }
        let mut data = Vec::with_capacity(voxel_count(size));
        for z in 0..size[2] {
            for y in 0..size[1] {
                let start = linear_index(self.dims, origin[0], origin[1] + y, origin[2] + z);
                data.extend_from_slice(&self.data[start..start + size[0]]);
            }
        }
        GrayVolume::new(size, self.scale, self.depth, data)
    }
}

/// Either kind of volume, as read from disk.
#[derive(Debug, Clone, PartialEq)]
pub enum Volume {
    Binary(BinaryVolume),
    Gray(GrayVolume),
}

impl Volume {
    pub fn dims(&self) -> Dims {
        match self {
            Volume::Binary(v) => v.dims(),
            Volume::Gray(v) => v.dims(),
        }
    }

    pub fn scale(&self) -> f64 {
        match self {
            Volume::Binary(v) => v.scale(),
            Volume::Gray(v) => v.scale(),
        }
    }

    pub fn crop(&self, origin: [usize; 3], size: Dims) -> Result<Self> {
        Ok(match self {
            Volume::Binary(v) => Volume::Binary(v.crop(origin, size)?),
            Volume::Gray(v) => Volume::Gray(v.crop(origin, size)?),
        })
    }
}

impl From<BinaryVolume> for Volume {
    fn from(v: BinaryVolume) -> Self {
        Volume::Binary(v)
    }
}

impl From<GrayVolume> for Volume {
    fn from(v: GrayVolume) -> Self {
        Volume::Gray(v)
    }
}

/// Connected-component labels: 0 = background, `1..=count` = component id.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelField {
    dims: Dims,
    labels: Vec<u32>,
    count: usize,
}

impl LabelField {
    pub(crate) fn from_parts(dims: Dims, labels: Vec<u32>, count: usize) -> Self {
        LabelField {
            dims,
            labels,
            count,
        }
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    /// Number of components (the largest label).
    pub fn count(&self) -> usize {
        self.count
    }

    /// Voxel count per component, indexed by `label - 1`.
    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0usize; self.count];
        for &l in &self.labels {
            if l > 0 {
                sizes[l as usize - 1] += 1;
            }
        }
        sizes
    }

    /// Inclusive bounding box `(min, max)` per component, indexed by `label - 1`.
    pub fn bounding_boxes(&self) -> Vec<([usize; 3], [usize; 3])> {
        let mut boxes = vec![([usize::MAX; 3], [0usize; 3]); self.count];
        for (i, &l) in self.labels.iter().enumerate() {
            if l == 0 {
                continue;
            }
            let c = coords(self.dims, i);
            let (lo, hi) = &mut boxes[l as usize - 1];
            for a in 0..3 {
                lo[a] = lo[a].min(c[a]);
                hi[a] = hi[a].max(c[a]);
            }
        }
        boxes
    }
}

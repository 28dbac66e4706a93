//! Raw voxel payload + JSON sidecar.
//!
//! The payload is little-endian, one `u8` per voxel for `binary`/`gray8` and
//! one `u16` per voxel for `gray16`, indexed `x + y*nx + z*nx*ny`. The sidecar
//! shares the payload's basename with a `.json` extension:
//!
//! ```json
//! {"dims":[nx,ny,nz], "scale_um": 2.35, "kind": "binary", "pore_value": 1}
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::volume::{voxel_count, BinaryVolume, BitDepth, Dims, GrayVolume, Volume, PORE, ROCK};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sidecar {
    pub dims: Dims,
    pub scale_um: f64,
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pore_value: Option<u8>,
}

/// Sidecar path for a payload path (`foo.raw` -> `foo.json`).
pub fn sidecar_path(raw: &Path) -> PathBuf {
    raw.with_extension("json")
}

fn payload_path(path: &Path) -> PathBuf {
    if path.extension().is_some_and(|e| e == "json") {
        path.with_extension("raw")
    } else {
        path.to_path_buf()
    }
}

pub fn read_sidecar(raw: &Path) -> Result<Sidecar> {
    let path = sidecar_path(raw);
    let text = fs::read_to_string(&path).map_err(|e| Error::Sidecar {
        path: path.clone(),
        reason: format!("cannot read: {e}"),
    })?;
    serde_json::from_str(&text).map_err(|e| Error::Sidecar {
        path,
        reason: format!("corrupt: {e}"),
    })
}

/// Loads a volume described by its sidecar. `path` may name either the payload
/// or the sidecar.
pub fn load_volume(path: impl AsRef<Path>) -> Result<Volume> {
    let raw = payload_path(path.as_ref());
    let sidecar = read_sidecar(&raw)?;
    let bytes = fs::read(&raw).map_err(|e| Error::io(&raw, e))?;
    decode(&sidecar, bytes)
}

/// Loads a volume and requires it to be binary.
pub fn load_binary(path: impl AsRef<Path>) -> Result<BinaryVolume> {
    match load_volume(path.as_ref())? {
        Volume::Binary(v) => Ok(v),
        Volume::Gray(_) => Err(Error::InvalidInput(format!(
            "{} is grayscale; segment it first",
            path.as_ref().display()
        ))),
    }
}

fn decode(sidecar: &Sidecar, bytes: Vec<u8>) -> Result<Volume> {
    let n = voxel_count(sidecar.dims);
    match sidecar.kind.as_str() {
        "binary" => {
            if bytes.len() != n {
                return Err(Error::DataLength {
                    expected: n,
                    actual: bytes.len(),
                });
            }
            let pore = sidecar.pore_value.unwrap_or(PORE);
            let rock = if pore == ROCK { PORE } else { ROCK };
            let data = bytes
                .into_iter()
                .map(|b| match b {
                    b if b == pore => Ok(PORE),
                    b if b == rock => Ok(ROCK),
                    other => Err(Error::UnknownEncoding(format!(
                        "byte {other} is neither pore ({pore}) nor rock ({rock})"
                    ))),
                })
                .collect::<Result<Vec<u8>>>()?;
            Ok(BinaryVolume::new(sidecar.dims, sidecar.scale_um, data)?.into())
        }
        "gray8" => {
            if bytes.len() != n {
                return Err(Error::DataLength {
                    expected: n,
                    actual: bytes.len(),
                });
            }
            Ok(GrayVolume::from_u8(sidecar.dims, sidecar.scale_um, &bytes)?.into())
        }
        "gray16" => {
            if bytes.len() != 2 * n {
                return Err(Error::DataLength {
                    expected: 2 * n,
                    actual: bytes.len(),
                });
            }
            let data = bytes
                .chunks_exact(2)
                .map(|c| u16::from_le_bytes([c[0], c[1]]))
                .collect();
            Ok(GrayVolume::new(sidecar.dims, sidecar.scale_um, BitDepth::Sixteen, data)?.into())
        }
        other => Err(Error::UnknownEncoding(format!("volume kind {other:?}"))),
    }
}

fn encode(volume: &Volume) -> (Sidecar, Vec<u8>) {
    match volume {
        Volume::Binary(v) => (
            Sidecar {
                dims: v.dims(),
                scale_um: v.scale(),
                kind: "binary".into(),
                pore_value: Some(PORE),
            },
            v.data().to_vec(),
        ),
        Volume::Gray(v) => match v.depth() {
            BitDepth::Eight => (
                Sidecar {
                    dims: v.dims(),
                    scale_um: v.scale(),
                    kind: "gray8".into(),
                    pore_value: None,
                },
                v.data().iter().map(|&x| x as u8).collect(),
            ),
            BitDepth::Sixteen => (
                Sidecar {
                    dims: v.dims(),
                    scale_um: v.scale(),
                    kind: "gray16".into(),
                    pore_value: None,
                },
                v.data().iter().flat_map(|x| x.to_le_bytes()).collect(),
            ),
        },
    }
}

/// Writes the payload at `path` and its sidecar next to it.
pub fn save_volume(volume: &Volume, path: impl AsRef<Path>) -> Result<()> {
    let raw = payload_path(path.as_ref());
    if let Some(parent) = raw.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    let (sidecar, bytes) = encode(volume);
    fs::write(&raw, bytes).map_err(|e| Error::io(&raw, e))?;
    let side = sidecar_path(&raw);
    let mut text = serde_json::to_string_pretty(&sidecar).expect("sidecar serializes");
    text.push('\n');
    fs::write(&side, text).map_err(|e| Error::io(&side, e))
}

pub fn save_binary(volume: &BinaryVolume, path: impl AsRef<Path>) -> Result<()> {
    save_volume(&Volume::Binary(volume.clone()), path)
}

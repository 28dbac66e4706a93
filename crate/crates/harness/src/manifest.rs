//! Run-directory manifest: every artifact with its size and SHA-256.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{HarnessError, HarnessResult};

pub const MANIFEST_FILE: &str = "manifest.json";
/// Wall-clock timings; the only artifact that differs between identical runs.
pub const TIMINGS_FILE: &str = "timings.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RunStatus {
    Complete,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileEntry {
    /// Relative to the run directory, `/`-separated.
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub status: RunStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub files: Vec<FileEntry>,
}

fn walk(root: &Path, rel: &str, out: &mut Vec<FileEntry>) -> HarnessResult<()> {
    let dir = root.join(rel);
    let mut entries: Vec<_> = fs::read_dir(&dir)
        .map_err(|e| HarnessError::io(&dir, e))?
        .collect::<Result<_, _>>()
        .map_err(|e| HarnessError::io(&dir, e))?;
    entries.sort_by_key(|e| e.file_name());
    for entry in entries {
        let name = entry.file_name().to_string_lossy().into_owned();
        let path = if rel.is_empty() {
            name
        } else {
            format!("{rel}/{name}")
        };
        if path == MANIFEST_FILE || path == TIMINGS_FILE {
            continue;
        }
        let full = entry.path();
        if full.is_dir() {
            walk(root, &path, out)?;
        } else {
            let bytes = fs::read(&full).map_err(|e| HarnessError::io(&full, e))?;
            out.push(FileEntry {
                path,
                bytes: bytes.len() as u64,
                sha256: hex::encode(Sha256::digest(&bytes)),
            });
        }
    }
    Ok(())
}

/// Hashes every file under `dir` except the manifest and timings, sorted by path.
pub fn hash_run_dir(dir: impl AsRef<Path>) -> HarnessResult<Vec<FileEntry>> {
    let mut out = Vec::new();
    walk(dir.as_ref(), "", &mut out)?;
    Ok(out)
}

/// Digest over all entries: the run directory's fingerprint.
pub fn run_digest(files: &[FileEntry]) -> String {
    let mut h = Sha256::new();
    for f in files {
        h.update(f.path.as_bytes());
        h.update([0]);
        h.update(f.sha256.as_bytes());
        h.update(*b"\n");
    }
    hex::encode(h.finalize())
}

pub fn write_manifest(
    dir: &Path,
    status: RunStatus,
    error: Option<String>,
) -> HarnessResult<Manifest> {
    let manifest = Manifest {
        status,
        error,
        files: hash_run_dir(dir)?,
    };
    let path = dir.join(MANIFEST_FILE);
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes") + "\n";
    fs::write(&path, text).map_err(|e| HarnessError::io(&path, e))?;
    Ok(manifest)
}

pub fn read_manifest(dir: &Path) -> HarnessResult<Manifest> {
    let path = dir.join(MANIFEST_FILE);
    let text = fs::read_to_string(&path).map_err(|e| HarnessError::io(&path, e))?;
    serde_json::from_str(&text)
        .map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))
}

//! Checkpoint files: a JSON manifest (layer names, shapes, byte offsets,
//! run metadata) next to a flat little-endian f32 array.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{layout, BlockInfo, PolicyParams, PARAM_COUNT};
use crate::error::Error;
use crate::rewards::Stage;
use crate::terrain::StairKind;
use crate::Result;

pub const CHECKPOINT_FORMAT_VERSION: u32 = 1;

/// Run metadata stored alongside the weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckpointMeta {
    pub stage: Stage,
    pub seed: u64,
    pub iteration: u64,
    /// Terrain kind the policy was trained on, when known. Transfer
    /// evaluation uses it to find each terrain's own-trained model.
    pub terrain_kind: Option<StairKind>,
}

#[derive(Debug, Serialize, Deserialize)]
struct Manifest {
    format_version: u32,
    dtype: String,
    byte_order: String,
    total_params: usize,
    stage: Stage,
    seed: u64,
    iteration: u64,
    terrain_kind: Option<StairKind>,
    data_file: String,
    blocks: Vec<ManifestBlock>,
}

#[derive(Debug, Serialize, Deserialize, PartialEq)]
struct ManifestBlock {
    name: String,
    shape: Vec<usize>,
    offset_bytes: usize,
    len: usize,
}

fn manifest_blocks() -> Vec<ManifestBlock> {
    layout()
        .iter()
        .map(|b: &BlockInfo| ManifestBlock {
            name: b.name.clone(),
            shape: b.shape.clone(),
            offset_bytes: b.offset * 4,
            len: b.len,
        })
        .collect()
}

/// Write `<stem>.json` and `<stem>.bin`. Returns both paths.
pub fn save_checkpoint(
    stem: &Path,
    params: &PolicyParams,
    meta: &CheckpointMeta,
) -> Result<(PathBuf, PathBuf)> {
    if let Some(dir) = stem.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir)?;
        }
    }
    let json_path = stem.with_extension("json");
    let bin_path = stem.with_extension("bin");
    let data_file = bin_path
        .file_name()
        .map(|f| f.to_string_lossy().into_owned())
        .unwrap_or_else(|| "checkpoint.bin".into());

    let manifest = Manifest {
        format_version: CHECKPOINT_FORMAT_VERSION,
        dtype: "f32".into(),
        byte_order: "little".into(),
        total_params: PARAM_COUNT,
        stage: meta.stage,
        seed: meta.seed,
        iteration: meta.iteration,
        terrain_kind: meta.terrain_kind,
        data_file,
        blocks: manifest_blocks(),
    };
    fs::write(&json_path, serde_json::to_string_pretty(&manifest)?)?;

    let mut bytes = Vec::with_capacity(PARAM_COUNT * 4);
    for v in params.data() {
        bytes.extend_from_slice(&(*v as f32).to_le_bytes());
    }
    fs::write(&bin_path, bytes)?;
    Ok((json_path, bin_path))
}

/// Load a checkpoint from its manifest path (or stem), validating the
/// manifest's shapes and offsets against the compiled layout.
pub fn load_checkpoint(path: &Path) -> Result<(PolicyParams, CheckpointMeta)> {
    let json_path = if path.extension().map(|e| e == "json").unwrap_or(false) {
        path.to_path_buf()
    } else {
        path.with_extension("json")
    };
    let text = fs::read_to_string(&json_path)
        .map_err(|e| Error::Checkpoint(format!("cannot read {}: {e}", json_path.display())))?;
    let manifest: Manifest = serde_json::from_str(&text)
        .map_err(|e| Error::Checkpoint(format!("bad manifest {}: {e}", json_path.display())))?;

    if manifest.format_version != CHECKPOINT_FORMAT_VERSION {
        return Err(Error::Checkpoint(format!(
            "unsupported checkpoint format version {}",
            manifest.format_version
        )));
    }
    if manifest.dtype != "f32" || manifest.byte_order != "little" {
        return Err(Error::Checkpoint("checkpoint must be little-endian f32".into()));
    }
    if manifest.total_params != PARAM_COUNT {
        return Err(Error::Checkpoint(format!(
            "parameter count mismatch: manifest {} vs expected {PARAM_COUNT}",
            manifest.total_params
        )));
    }
    let expected = manifest_blocks();
    if manifest.blocks != expected {
        return Err(Error::Checkpoint("manifest block shapes/offsets do not match this architecture".into()));
    }

    let bin_path = json_path
        .parent()
        .map(|d| d.join(&manifest.data_file))
        .unwrap_or_else(|| PathBuf::from(&manifest.data_file));
    let bytes = fs::read(&bin_path)
        .map_err(|e| Error::Checkpoint(format!("cannot read {}: {e}", bin_path.display())))?;
    if bytes.len() != PARAM_COUNT * 4 {
        return Err(Error::Checkpoint(format!(
            "data file has {} bytes, expected {}",
            bytes.len(),
            PARAM_COUNT * 4
        )));
    }
    let mut data = Vec::with_capacity(PARAM_COUNT);
    for chunk in bytes.chunks_exact(4) {
        data.push(f32::from_le_bytes([chunk[0], chunk[1], chunk[2], chunk[3]]) as f64);
    }
    let params = PolicyParams::from_flat(data)?;
    let meta = CheckpointMeta {
        stage: manifest.stage,
        seed: manifest.seed,
        iteration: manifest.iteration,
        terrain_kind: manifest.terrain_kind,
    };
    Ok((params, meta))
}

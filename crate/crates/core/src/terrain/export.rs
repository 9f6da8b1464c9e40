//! Heightfield file exports: CSV grid, 16-bit PGM, and a JSON manifest.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::Serialize;

use super::{HeightField, StairSpec};
use crate::error::Error;
use crate::Result;

#[derive(Serialize)]
struct HeightFieldManifest<'a> {
    kind: &'a str,
    seed: u64,
    cell_size: f64,
    nx: usize,
    ny: usize,
    origin: (f64, f64),
    spawn_pose: (f64, f64, f64),
    goal_pose: (f64, f64, f64, f64),
    /// Affine scale of the PGM: height = pgm_offset + sample * pgm_scale.
    pgm_offset: f64,
    pgm_scale: f64,
    spec: &'a StairSpec,
}

/// Write `<stem>.csv`, `<stem>.pgm`, and `<stem>.json` for a heightfield.
///
/// CSV layout: one header row `nx,ny,cell_size`, then `ny` rows of `nx`
/// heights in meters. The PGM is 16-bit with the affine height scale recorded
/// in the JSON manifest. Returns the three paths written.
pub fn export_heightfield(hf: &HeightField, dir: &Path, stem: &str) -> Result<Vec<std::path::PathBuf>> {
    fs::create_dir_all(dir)?;
    let csv_path = dir.join(format!("{stem}.csv"));
    let pgm_path = dir.join(format!("{stem}.pgm"));
    let json_path = dir.join(format!("{stem}.json"));

    let mut csv = String::new();
    csv.push_str(&format!("{},{},{}\n", hf.nx, hf.ny, hf.cell_size));
    for iy in 0..hf.ny {
        let row: Vec<String> = (0..hf.nx)
            .map(|ix| format!("{:.6}", hf.height_at_cell(ix, iy)))
            .collect();
        csv.push_str(&row.join(","));
        csv.push('\n');
    }
    fs::write(&csv_path, csv)?;

    let heights = hf.heights();
    let h_min = heights.iter().cloned().fold(f64::INFINITY, f64::min);
    let h_max = heights.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let span = (h_max - h_min).max(1e-12);
    let scale = span / 65535.0;
    let mut pgm = Vec::with_capacity(32 + heights.len() * 2);
    pgm.extend_from_slice(format!("P5\n{} {}\n65535\n", hf.nx, hf.ny).as_bytes());
    for iy in 0..hf.ny {
        for ix in 0..hf.nx {
            let v = ((hf.height_at_cell(ix, iy) - h_min) / scale).round() as u32;
            let v = v.min(65535) as u16;
            // 16-bit PGM samples are most-significant-byte first.
            pgm.extend_from_slice(&v.to_be_bytes());
        }
    }
    let mut f = fs::File::create(&pgm_path)?;
    f.write_all(&pgm)?;

    let manifest = HeightFieldManifest {
        kind: hf.spec.kind.as_str(),
        seed: hf.seed,
        cell_size: hf.cell_size,
        nx: hf.nx,
        ny: hf.ny,
        origin: hf.origin,
        spawn_pose: (hf.spawn_pose.x, hf.spawn_pose.y, hf.spawn_pose.yaw),
        goal_pose: (hf.goal_pose.x, hf.goal_pose.y, hf.goal_pose.z, hf.goal_pose.yaw),
        pgm_offset: h_min,
        pgm_scale: scale,
        spec: &hf.spec,
    };
    fs::write(&json_path, serde_json::to_string_pretty(&manifest)?)?;
    Ok(vec![csv_path, pgm_path, json_path])
}

/// Parse a stair spec from a JSON file mirroring [`StairSpec`] field names.
pub fn load_stair_spec_json(path: &Path) -> Result<StairSpec> {
    let text = fs::read_to_string(path)?;
    let spec: StairSpec = serde_json::from_str(&text)
        .map_err(|e| Error::Terrain(format!("invalid stair spec json: {e}")))?;
    spec.validate()?;
    Ok(spec)
}

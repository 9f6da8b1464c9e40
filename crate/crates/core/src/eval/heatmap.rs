//! Critic-value heatmaps over the terrain plane.
//!
//! For each lattice point the observation is pinned the way the analysis
//! fixes it: zero body velocities, nominal stance, zero previous action,
//! base at standing height over the local terrain, goal taken from the
//! terrain metadata, heading facing the goal (or fixed). Only the critic
//! output is recorded; parameters are never touched.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use crate::env::{obs_layout, wrap_angle, EnvParams};
use crate::net::{forward, PolicyParams, Trace, OBS_DIM};
use crate::terrain::{CellKind, HeightField};
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum YawMode {
    /// Heading points at the goal from every lattice point.
    FaceGoal,
    /// Constant heading everywhere.
    Fixed(f64),
}

#[derive(Debug, Clone)]
pub struct HeatmapGrid {
    pub origin: (f64, f64),
    pub spacing: f64,
    pub nx: usize,
    pub ny: usize,
    /// Row-major critic values; `None` marks off-grid lattice points.
    pub values: Vec<Option<f64>>,
}

impl HeatmapGrid {
    pub fn value_at(&self, ix: usize, iy: usize) -> Option<f64> {
        self.values[iy * self.nx + ix]
    }

    pub fn point(&self, ix: usize, iy: usize) -> (f64, f64) {
        (
            self.origin.0 + (ix as f64 + 0.5) * self.spacing,
            self.origin.1 + (iy as f64 + 0.5) * self.spacing,
        )
    }
}

/// Evaluate the critic across the terrain's x-y plane.
pub fn critic_heatmap(
    params: &PolicyParams,
    hf: &HeightField,
    spacing: f64,
    yaw_mode: YawMode,
    env_params: &EnvParams,
) -> Result<HeatmapGrid> {
    let (x0, y0, x1, y1) = hf.bounds();
    let nx = ((x1 - x0) / spacing).ceil() as usize;
    let ny = ((y1 - y0) / spacing).ceil() as usize;
    let mut values = vec![None; nx * ny];

    values
        .par_chunks_mut(nx)
        .enumerate()
        .try_for_each_init(Trace::new, |trace, (iy, row)| -> Result<()> {
            let mut obs = vec![0.0; OBS_DIM];
            for (ix, cell) in row.iter_mut().enumerate() {
                let x = x0 + (ix as f64 + 0.5) * spacing;
                let y = y0 + (iy as f64 + 0.5) * spacing;
                if !hf.contains(x, y) {
                    continue;
                }
                let ground = hf.sample_height(x, y);
                let yaw = match yaw_mode {
                    YawMode::FaceGoal => (hf.goal_pose.y - y).atan2(hf.goal_pose.x - x),
                    YawMode::Fixed(v) => v,
                };
                compose_pinned_obs(hf, x, y, ground, yaw, env_params, &mut obs);
                *cell = Some(forward(params, &obs, trace)?.value);
            }
            Ok(())
        })?;

    Ok(HeatmapGrid { origin: (x0, y0), spacing, nx, ny, values })
}

/// Observation with velocities, joints, and previous action pinned to zero.
fn compose_pinned_obs(
    hf: &HeightField,
    x: f64,
    y: f64,
    ground: f64,
    yaw: f64,
    env_params: &EnvParams,
    obs: &mut [f64],
) {
    obs.iter_mut().for_each(|v| *v = 0.0);
    obs[obs_layout::GRAVITY.start + 2] = -1.0;
    let goal = hf.goal_pose;
    let (dx, dy) = (goal.x - x, goal.y - y);
    let (sin_yaw, cos_yaw) = yaw.sin_cos();
    obs[obs_layout::GOAL.start] = cos_yaw * dx + sin_yaw * dy;
    obs[obs_layout::GOAL.start + 1] = -sin_yaw * dx + cos_yaw * dy;
    obs[obs_layout::GOAL.start + 2] = goal.z - ground;
    obs[obs_layout::GOAL.start + 3] = wrap_angle(goal.yaw - yaw);
    let z_base = ground + env_params.h_stand;
    let hm = hf.local_heightmap(x, y, z_base, yaw, env_params.heightmap_spacing);
    obs[obs_layout::HEIGHTMAP].copy_from_slice(&hm);
}

/// Mean critic value over goal-adjacent lattice points vs wall-adjacent ones,
/// with the cell sets taken from the terrain's metadata (goal pose and wall
/// mask).
pub fn cell_set_means(grid: &HeatmapGrid, hf: &HeightField, goal_radius: f64) -> (f64, f64) {
    let mut goal_sum = 0.0;
    let mut goal_n = 0usize;
    let mut wall_sum = 0.0;
    let mut wall_n = 0usize;
    for iy in 0..grid.ny {
        for ix in 0..grid.nx {
            let Some(v) = grid.value_at(ix, iy) else { continue };
            let (x, y) = grid.point(ix, iy);
            let d_goal = ((x - hf.goal_pose.x).powi(2) + (y - hf.goal_pose.y).powi(2)).sqrt();
            let kind = hf.cell_kind(x, y);
            if kind == Some(CellKind::Wall) {
                wall_sum += v;
                wall_n += 1;
            } else if d_goal <= goal_radius {
                goal_sum += v;
                goal_n += 1;
            }
        }
    }
    (
        if goal_n > 0 { goal_sum / goal_n as f64 } else { f64::NAN },
        if wall_n > 0 { wall_sum / wall_n as f64 } else { f64::NAN },
    )
}

#[derive(Serialize)]
struct HeatmapSidecar {
    origin: (f64, f64),
    spacing: f64,
    nx: usize,
    ny: usize,
    value_min: f64,
    value_max: f64,
    /// PGM decode: value = pgm_offset + sample * pgm_scale; sample 0 also
    /// encodes missing cells.
    pgm_offset: f64,
    pgm_scale: f64,
}

/// Write `<stem>.csv`, `<stem>.pgm` (16-bit), and `<stem>.json`.
pub fn write_heatmap(grid: &HeatmapGrid, dir: &Path, stem: &str) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let csv_path = dir.join(format!("{stem}.csv"));
    let pgm_path = dir.join(format!("{stem}.pgm"));
    let json_path = dir.join(format!("{stem}.json"));

    let mut csv = String::new();
    for iy in 0..grid.ny {
        let row: Vec<String> = (0..grid.nx)
            .map(|ix| grid.value_at(ix, iy).map(|v| format!("{v:.6}")).unwrap_or_default())
            .collect();
        csv.push_str(&row.join(","));
        csv.push('\n');
    }
    fs::write(&csv_path, csv)?;

    let finite: Vec<f64> = grid.values.iter().flatten().copied().collect();
    let v_min = finite.iter().cloned().fold(f64::INFINITY, f64::min);
    let v_max = finite.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let span = (v_max - v_min).max(1e-12);
    let scale = span / 65534.0; // samples 1..=65535; 0 = missing
    let mut pgm = Vec::with_capacity(32 + grid.values.len() * 2);
    pgm.extend_from_slice(format!("P5\n{} {}\n65535\n", grid.nx, grid.ny).as_bytes());
    for iy in 0..grid.ny {
        for ix in 0..grid.nx {
            let sample = match grid.value_at(ix, iy) {
                Some(v) => 1 + (((v - v_min) / scale).round() as u32).min(65534) as u16,
                None => 0,
            };
            pgm.extend_from_slice(&sample.to_be_bytes());
        }
    }
    let mut f = fs::File::create(&pgm_path)?;
    f.write_all(&pgm)?;

    let sidecar = HeatmapSidecar {
        origin: grid.origin,
        spacing: grid.spacing,
        nx: grid.nx,
        ny: grid.ny,
        value_min: v_min,
        value_max: v_max,
        pgm_offset: v_min - scale,
        pgm_scale: scale,
    };
    fs::write(&json_path, serde_json::to_string_pretty(&sidecar)?)?;
    Ok(vec![csv_path, pgm_path, json_path])
}

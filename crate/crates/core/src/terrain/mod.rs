//! Procedural stair heightfields and spatial queries.
//!
//! A [`HeightField`] is a regular grid of elevations plus the metadata the
//! rest of the pipeline needs: spawn pose, goal pose, a centerline polyline
//! with cumulative arclength, and a per-cell kind mask (treads, landings,
//! walls, ...). Stairs are piecewise-constant, so height sampling is
//! nearest-cell with no interpolation; queries outside the grid return the
//! void sentinel used by fall detection.

mod export;
mod generate;

pub use export::{export_heightfield, load_stair_spec_json};
pub use generate::generate;

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::Result;

/// Height returned for queries outside the grid. Fall detection keys off it.
pub const VOID_HEIGHT: f64 = -10.0;

/// Side length of the local height-map observation (cells per axis).
pub const HEIGHTMAP_SIDE: usize = 21;
/// Total cells in the local height-map observation.
pub const HEIGHTMAP_CELLS: usize = HEIGHTMAP_SIDE * HEIGHTMAP_SIDE;

/// Stair layout family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StairKind {
    Pyramid,
    Straight,
    LShaped,
    UShaped,
    Spiral,
}

impl StairKind {
    pub const ALL: [StairKind; 5] = [
        StairKind::Pyramid,
        StairKind::Straight,
        StairKind::LShaped,
        StairKind::UShaped,
        StairKind::Spiral,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            StairKind::Pyramid => "pyramid",
            StairKind::Straight => "straight",
            StairKind::LShaped => "l_shaped",
            StairKind::UShaped => "u_shaped",
            StairKind::Spiral => "spiral",
        }
    }

    pub fn parse(s: &str) -> Result<StairKind> {
        match s {
            "pyramid" => Ok(StairKind::Pyramid),
            "straight" => Ok(StairKind::Straight),
            "l_shaped" => Ok(StairKind::LShaped),
            "u_shaped" => Ok(StairKind::UShaped),
            "spiral" => Ok(StairKind::Spiral),
            other => Err(Error::Terrain(format!("unknown stair kind `{other}`"))),
        }
    }
}

impl std::fmt::Display for StairKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Full parameterization of one stair terrain.
///
/// JSON round-trips field-for-field; unknown keys are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StairSpec {
    pub kind: StairKind,
    /// Vertical rise of one step, meters.
    pub riser_height: f64,
    /// Horizontal depth of one step surface, meters.
    pub tread_depth: f64,
    /// Width of the walkable stair channel, meters.
    pub stair_width: f64,
    /// Steps in one ascending run.
    pub steps_per_run: usize,
    /// Depth of the landing joining two runs, meters.
    pub landing_depth: f64,
    /// Number of ascending runs (1 for straight/spiral/pyramid, 2 for L/U).
    pub runs: usize,
    /// Height of channel walls above the local stair surface, meters.
    pub wall_height: f64,
    /// Spiral only: radius of the central column, meters.
    #[serde(default = "default_spiral_inner_radius")]
    pub spiral_inner_radius: f64,
    /// Spiral only: total swept angle of the stair, radians.
    #[serde(default = "default_spiral_total_turn")]
    pub spiral_total_turn: f64,
}

fn default_spiral_inner_radius() -> f64 {
    0.6
}

fn default_spiral_total_turn() -> f64 {
    1.25 * std::f64::consts::PI
}

impl StairSpec {
    /// Validate the invariants shared by all kinds plus per-kind run counts.
    pub fn validate(&self) -> Result<()> {
        if !(self.riser_height > 0.0) {
            return Err(Error::Terrain("riser_height must be > 0".into()));
        }
        if !(self.tread_depth > 0.0) {
            return Err(Error::Terrain("tread_depth must be > 0".into()));
        }
        if !(self.stair_width > 0.0) {
            return Err(Error::Terrain("stair_width must be > 0".into()));
        }
        if self.steps_per_run < 1 {
            return Err(Error::Terrain("steps_per_run must be >= 1".into()));
        }
        match self.kind {
            StairKind::LShaped | StairKind::UShaped => {
                if self.runs != 2 {
                    return Err(Error::Terrain(format!(
                        "{} stairs require runs = 2 (got {})",
                        self.kind, self.runs
                    )));
                }
            }
            StairKind::Straight | StairKind::Spiral => {
                if self.runs != 1 {
                    return Err(Error::Terrain(format!(
                        "{} stairs require runs = 1 (got {})",
                        self.kind, self.runs
                    )));
                }
            }
            StairKind::Pyramid => {}
        }
        if self.kind == StairKind::Spiral {
            if !(self.spiral_inner_radius > 0.0) {
                return Err(Error::Terrain("spiral_inner_radius must be > 0".into()));
            }
            if !(self.spiral_total_turn > 0.0) {
                return Err(Error::Terrain("spiral_total_turn must be > 0".into()));
            }
        }
        Ok(())
    }

    /// Total ascent from apron to goal landing, meters.
    pub fn total_rise(&self) -> f64 {
        let runs = if self.kind == StairKind::Pyramid { 1 } else { self.runs };
        self.riser_height * (self.steps_per_run * runs) as f64
    }
}

/// Terrain generation mode: training curriculum or held-out test ramp.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TerrainMode {
    Train,
    Test,
}

impl TerrainMode {
    pub fn max_level(&self) -> u32 {
        match self {
            TerrainMode::Train => 10,
            TerrainMode::Test => 6,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            TerrainMode::Train => "train",
            TerrainMode::Test => "test",
        }
    }
}

/// One difficulty rung: an index valid for its mode's range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DifficultyLevel(pub u32);

impl DifficultyLevel {
    pub fn new(index: u32, mode: TerrainMode) -> Result<Self> {
        if index < 1 || index > mode.max_level() {
            return Err(Error::Terrain(format!(
                "difficulty level {index} out of range 1..={} for {} mode",
                mode.max_level(),
                mode.as_str()
            )));
        }
        Ok(DifficultyLevel(index))
    }

    pub fn index(&self) -> u32 {
        self.0
    }
}

/// Knobs for [`difficulty_to_spec`] and the generators. All defaults are
/// config-overridable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TerrainParams {
    /// Grid resolution, meters per cell.
    pub cell_size: f64,
    /// Training riser ramp endpoints (level 1 -> level 10), meters.
    pub train_riser: (f64, f64),
    /// Training tread ramp endpoints (level 1 -> level 10), meters.
    pub train_tread: (f64, f64),
    /// Test riser ramp endpoints (level 1 -> level 6), meters. Chosen so no
    /// test riser coincides with a training riser.
    pub test_riser: (f64, f64),
    /// Fixed tread depth for test terrains, meters.
    pub test_tread: f64,
    pub stair_width: f64,
    pub steps_per_run: usize,
    pub landing_depth: f64,
    pub wall_height: f64,
    /// Flat approach strip before the first step, meters.
    pub apron_length: f64,
    /// Flat ground strip beside unwalled stairs, meters.
    pub side_margin: f64,
    pub spiral_inner_radius: f64,
    pub spiral_total_turn: f64,
    /// Half-size of the pyramid top plateau, meters.
    pub pyramid_plateau_half: f64,
    /// Hard cap on grid cells per axis; generation fails beyond it.
    pub max_cells_per_axis: usize,
}

impl Default for TerrainParams {
    fn default() -> Self {
        TerrainParams {
            cell_size: 0.05,
            train_riser: (0.08, 0.20),
            train_tread: (0.32, 0.26),
            test_riser: (0.09, 0.19),
            test_tread: 0.28,
            stair_width: 1.6,
            steps_per_run: 10,
            landing_depth: 1.2,
            wall_height: 1.0,
            apron_length: 2.0,
            side_margin: 1.0,
            spiral_inner_radius: 0.6,
            spiral_total_turn: 1.25 * std::f64::consts::PI,
            pyramid_plateau_half: 1.0,
            max_cells_per_axis: 1600,
        }
    }
}

/// Map a difficulty level onto a concrete stair spec.
///
/// Training risers/treads ramp linearly across ten levels; test risers sit on
/// a six-point ramp offset from every training value.
pub fn difficulty_to_spec(
    kind: StairKind,
    level: DifficultyLevel,
    mode: TerrainMode,
    params: &TerrainParams,
) -> Result<StairSpec> {
    // Re-validate: DifficultyLevel can be constructed for either mode.
    let level = DifficultyLevel::new(level.index(), mode)?;
    let i = (level.index() - 1) as f64;
    let (riser_height, tread_depth) = match mode {
        TerrainMode::Train => {
            let t = i / 9.0;
            (
                params.train_riser.0 + t * (params.train_riser.1 - params.train_riser.0),
                params.train_tread.0 + t * (params.train_tread.1 - params.train_tread.0),
            )
        }
        TerrainMode::Test => {
            let t = i / 5.0;
            (
                params.test_riser.0 + t * (params.test_riser.1 - params.test_riser.0),
                params.test_tread,
            )
        }
    };
    let runs = match kind {
        StairKind::LShaped | StairKind::UShaped => 2,
        _ => 1,
    };
    let spec = StairSpec {
        kind,
        riser_height,
        tread_depth,
        stair_width: params.stair_width,
        steps_per_run: params.steps_per_run,
        landing_depth: params.landing_depth,
        runs,
        wall_height: params.wall_height,
        spiral_inner_radius: params.spiral_inner_radius,
        spiral_total_turn: params.spiral_total_turn,
    };
    spec.validate()?;
    Ok(spec)
}

/// What a grid cell is part of. Exported with the heightfield and used to
/// pick cell sets for critic-heatmap summaries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CellKind {
    /// Flat ground outside the stair proper (aprons, side margins).
    Ground,
    Tread,
    Landing,
    Wall,
}

/// Spawn placement: position on the apron plus heading.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpawnPose {
    pub x: f64,
    pub y: f64,
    pub yaw: f64,
}

/// Goal placement: position, terrain height, and required heading.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GoalPose {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub yaw: f64,
}

/// Polyline from spawn to goal with cumulative arclength per waypoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Centerline {
    points: Vec<(f64, f64)>,
    cumulative: Vec<f64>,
}

impl Centerline {
    pub fn new(points: Vec<(f64, f64)>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::Terrain("centerline needs at least 2 waypoints".into()));
        }
        let mut cumulative = Vec::with_capacity(points.len());
        cumulative.push(0.0);
        for w in points.windows(2) {
            let seg = ((w[1].0 - w[0].0).powi(2) + (w[1].1 - w[0].1).powi(2)).sqrt();
            if seg <= 0.0 {
                return Err(Error::Terrain("centerline arclength must be strictly increasing".into()));
            }
            cumulative.push(cumulative.last().unwrap() + seg);
        }
        Ok(Centerline { points, cumulative })
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    pub fn total_length(&self) -> f64 {
        *self.cumulative.last().unwrap()
    }

    /// Point on the polyline at arclength `s` (clamped to the ends).
    pub fn point_at(&self, s: f64) -> (f64, f64) {
        let s = s.clamp(0.0, self.total_length());
        for i in 0..self.points.len() - 1 {
            if s <= self.cumulative[i + 1] {
                let seg = self.cumulative[i + 1] - self.cumulative[i];
                let t = (s - self.cumulative[i]) / seg;
                let (ax, ay) = self.points[i];
                let (bx, by) = self.points[i + 1];
                return (ax + t * (bx - ax), ay + t * (by - ay));
            }
        }
        *self.points.last().unwrap()
    }

    /// Project `(x, y)` onto the polyline.
    ///
    /// Returns `(s, lateral)`: arclength of the closest point and the signed
    /// perpendicular distance to the closest segment (positive = left of the
    /// segment direction). Ties resolve to the earliest segment.
    pub fn progress(&self, x: f64, y: f64) -> (f64, f64) {
        let mut best_d2 = f64::INFINITY;
        let mut best = (0.0, 0.0);
        for i in 0..self.points.len() - 1 {
            let (ax, ay) = self.points[i];
            let (bx, by) = self.points[i + 1];
            let (abx, aby) = (bx - ax, by - ay);
            let len2 = abx * abx + aby * aby;
            let t = (((x - ax) * abx + (y - ay) * aby) / len2).clamp(0.0, 1.0);
            let (px, py) = (ax + t * abx, ay + t * aby);
            let d2 = (x - px) * (x - px) + (y - py) * (y - py);
            if d2 < best_d2 - 1e-12 {
                best_d2 = d2;
                let len = len2.sqrt();
                let s = self.cumulative[i] + t * len;
                // Signed perpendicular distance to the segment's line.
                let lateral = (abx * (y - ay) - aby * (x - ax)) / len;
                best = (s, lateral);
            }
        }
        best
    }
}

/// Discretized terrain: elevation grid plus navigation metadata.
///
/// Immutable after generation; share it read-only across env workers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeightField {
    pub cell_size: f64,
    pub nx: usize,
    pub ny: usize,
    /// World coordinates of the (0, 0) cell corner.
    pub origin: (f64, f64),
    /// Row-major heights, index `iy * nx + ix`, meters.
    heights: Vec<f64>,
    /// Row-major cell kinds, same indexing as `heights`.
    mask: Vec<CellKind>,
    pub spawn_pose: SpawnPose,
    pub goal_pose: GoalPose,
    pub centerline: Centerline,
    /// The spec this field was generated from (kept for provenance/export).
    pub spec: StairSpec,
    pub seed: u64,
}

impl HeightField {
    #[allow(clippy::too_many_arguments)]
    pub(crate) fn from_parts(
        cell_size: f64,
        nx: usize,
        ny: usize,
        origin: (f64, f64),
        heights: Vec<f64>,
        mask: Vec<CellKind>,
        spawn_pose: SpawnPose,
        goal_pose: GoalPose,
        centerline: Centerline,
        spec: StairSpec,
        seed: u64,
    ) -> Result<Self> {
        if heights.len() != nx * ny || mask.len() != nx * ny {
            return Err(Error::Terrain("grid buffer size mismatch".into()));
        }
        if heights.iter().any(|h| !h.is_finite()) {
            return Err(Error::Terrain("non-finite height in grid".into()));
        }
        let hf = HeightField {
            cell_size,
            nx,
            ny,
            origin,
            heights,
            mask,
            spawn_pose,
            goal_pose,
            centerline,
            spec,
            seed,
        };
        if !hf.contains(hf.spawn_pose.x, hf.spawn_pose.y) {
            return Err(Error::Terrain("spawn pose outside grid".into()));
        }
        if !hf.contains(hf.goal_pose.x, hf.goal_pose.y) {
            return Err(Error::Terrain("goal pose outside grid".into()));
        }
        let goal_h = hf.sample_height(hf.goal_pose.x, hf.goal_pose.y);
        if (goal_h - hf.goal_pose.z).abs() > 1e-9 {
            return Err(Error::Terrain(format!(
                "goal height {} does not match sampled terrain {}",
                hf.goal_pose.z, goal_h
            )));
        }
        Ok(hf)
    }

    /// World-coordinate bounds as (x0, y0, x1, y1).
    pub fn bounds(&self) -> (f64, f64, f64, f64) {
        (
            self.origin.0,
            self.origin.1,
            self.origin.0 + self.nx as f64 * self.cell_size,
            self.origin.1 + self.ny as f64 * self.cell_size,
        )
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        let (x0, y0, x1, y1) = self.bounds();
        x >= x0 && x < x1 && y >= y0 && y < y1
    }

    fn cell_index(&self, x: f64, y: f64) -> Option<usize> {
        if !self.contains(x, y) {
            return None;
        }
        let ix = ((x - self.origin.0) / self.cell_size) as usize;
        let iy = ((y - self.origin.1) / self.cell_size) as usize;
        let ix = ix.min(self.nx - 1);
        let iy = iy.min(self.ny - 1);
        Some(iy * self.nx + ix)
    }

    /// Height of the cell containing `(x, y)`; [`VOID_HEIGHT`] outside the grid.
    pub fn sample_height(&self, x: f64, y: f64) -> f64 {
        match self.cell_index(x, y) {
            Some(i) => self.heights[i],
            None => VOID_HEIGHT,
        }
    }

    /// Cell kind at `(x, y)`; `None` outside the grid.
    pub fn cell_kind(&self, x: f64, y: f64) -> Option<CellKind> {
        self.cell_index(x, y).map(|i| self.mask[i])
    }

    pub fn height_at_cell(&self, ix: usize, iy: usize) -> f64 {
        self.heights[iy * self.nx + ix]
    }

    pub fn kind_at_cell(&self, ix: usize, iy: usize) -> CellKind {
        self.mask[iy * self.nx + ix]
    }

    pub fn heights(&self) -> &[f64] {
        &self.heights
    }

    /// World coordinates of a cell center.
    pub fn cell_center(&self, ix: usize, iy: usize) -> (f64, f64) {
        (
            self.origin.0 + (ix as f64 + 0.5) * self.cell_size,
            self.origin.1 + (iy as f64 + 0.5) * self.cell_size,
        )
    }

    /// 21x21 terrain scan around a pose, relative to `z_base`.
    ///
    /// Samples lie on a yaw-aligned lattice with `spacing` meters between
    /// points, centered on `(x, y)`. Output is row-major with the forward
    /// axis along increasing rows and the body-left axis along increasing
    /// columns. Samples outside the grid take the void sentinel relative
    /// value.
    pub fn local_heightmap(
        &self,
        x: f64,
        y: f64,
        z_base: f64,
        yaw: f64,
        spacing: f64,
    ) -> [f64; HEIGHTMAP_CELLS] {
        let mut out = [0.0; HEIGHTMAP_CELLS];
        let (sin_yaw, cos_yaw) = yaw.sin_cos();
        let half = (HEIGHTMAP_SIDE / 2) as isize;
        for r in 0..HEIGHTMAP_SIDE {
            let forward = (r as isize - half) as f64 * spacing;
            for c in 0..HEIGHTMAP_SIDE {
                let left = (c as isize - half) as f64 * spacing;
                let wx = x + cos_yaw * forward - sin_yaw * left;
                let wy = y + sin_yaw * forward + cos_yaw * left;
                out[r * HEIGHTMAP_SIDE + c] = self.sample_height(wx, wy) - z_base;
            }
        }
        out
    }

    /// Arclength progress and signed lateral offset relative to the centerline.
    pub fn centerline_progress(&self, x: f64, y: f64) -> (f64, f64) {
        self.centerline.progress(x, y)
    }
}

/// All difficulty levels of one stair kind/mode, generated up front and
/// shared read-only across env workers.
#[derive(Debug, Clone)]
pub struct TerrainSet {
    pub kind: StairKind,
    pub mode: TerrainMode,
    fields: Vec<std::sync::Arc<HeightField>>,
}

impl TerrainSet {
    pub fn generate_all(
        kind: StairKind,
        mode: TerrainMode,
        params: &TerrainParams,
        seed: u64,
    ) -> Result<Self> {
        let mut fields = Vec::new();
        for level in 1..=mode.max_level() {
            let spec = difficulty_to_spec(kind, DifficultyLevel(level), mode, params)?;
            fields.push(std::sync::Arc::new(generate(&spec, seed, params)?));
        }
        Ok(TerrainSet { kind, mode, fields })
    }

    pub fn level(&self, level: u32) -> Result<std::sync::Arc<HeightField>> {
        if level < 1 || level as usize > self.fields.len() {
            return Err(Error::Terrain(format!(
                "no terrain at level {level} (have 1..={})",
                self.fields.len()
            )));
        }
        Ok(self.fields[(level - 1) as usize].clone())
    }

    pub fn max_level(&self) -> u32 {
        self.fields.len() as u32
    }
}

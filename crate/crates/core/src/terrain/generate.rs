//! Stair heightfield generators.
//!
//! Each generator paints walkable regions (aprons, treads, landings) into a
//! grid, marks wall regions, then raises every wall cell `wall_height` above
//! the tallest walkable surface in its neighborhood. Generation is a pure
//! function of `(spec, params, seed)`; repeated calls are bit-identical.

use super::{
    Centerline, CellKind, GoalPose, HeightField, SpawnPose, StairKind, StairSpec, TerrainParams,
};
use crate::error::Error;
use crate::Result;

/// Thickness of channel walls, meters.
const WALL_THICKNESS: f64 = 0.3;
/// Arc length of the spiral apron and goal-landing sectors at mid-radius, meters.
const SPIRAL_FLAT_ARC: f64 = 1.2;

struct GridBuilder {
    cell: f64,
    nx: usize,
    ny: usize,
    heights: Vec<f64>,
    mask: Vec<CellKind>,
    walkable: Vec<bool>,
}

impl GridBuilder {
    fn new(width_m: f64, depth_m: f64, params: &TerrainParams) -> Result<Self> {
        let cell = params.cell_size;
        let nx = (width_m / cell).ceil() as usize;
        let ny = (depth_m / cell).ceil() as usize;
        if nx == 0 || ny == 0 {
            return Err(Error::Terrain("degenerate grid footprint".into()));
        }
        if nx > params.max_cells_per_axis || ny > params.max_cells_per_axis {
            return Err(Error::Terrain(format!(
                "footprint {nx}x{ny} cells exceeds the configured maximum of {} per axis",
                params.max_cells_per_axis
            )));
        }
        Ok(GridBuilder {
            cell,
            nx,
            ny,
            heights: vec![0.0; nx * ny],
            mask: vec![CellKind::Ground; nx * ny],
            walkable: vec![true; nx * ny],
        })
    }

    fn center(&self, ix: usize, iy: usize) -> (f64, f64) {
        ((ix as f64 + 0.5) * self.cell, (iy as f64 + 0.5) * self.cell)
    }

    /// Paint all cells whose center falls in `[x0, x1) x [y0, y1)`.
    fn paint_rect(&mut self, x0: f64, x1: f64, y0: f64, y1: f64, h: f64, kind: CellKind) {
        let ix0 = ((x0 / self.cell - 0.5).ceil().max(0.0)) as usize;
        let iy0 = ((y0 / self.cell - 0.5).ceil().max(0.0)) as usize;
        for iy in iy0..self.ny {
            let cy = (iy as f64 + 0.5) * self.cell;
            if cy >= y1 {
                break;
            }
            if cy < y0 {
                continue;
            }
            for ix in ix0..self.nx {
                let cx = (ix as f64 + 0.5) * self.cell;
                if cx >= x1 {
                    break;
                }
                if cx < x0 {
                    continue;
                }
                self.set(ix, iy, h, kind);
            }
        }
    }

    fn set(&mut self, ix: usize, iy: usize, h: f64, kind: CellKind) {
        let i = iy * self.nx + ix;
        self.heights[i] = h;
        self.mask[i] = kind;
        self.walkable[i] = kind != CellKind::Wall;
    }

    fn mark_wall_rect(&mut self, x0: f64, x1: f64, y0: f64, y1: f64) {
        self.paint_rect(x0, x1, y0, y1, 0.0, CellKind::Wall);
    }

    /// Raise every wall cell `wall_height` above the tallest walkable surface
    /// within a 0.6 m window (falls back to the global maximum when the
    /// window holds no walkable cell).
    fn finalize_walls(&mut self, wall_height: f64) {
        let radius = (0.6 / self.cell).ceil() as isize;
        let global_max = self
            .heights
            .iter()
            .zip(&self.walkable)
            .filter(|(_, w)| **w)
            .map(|(h, _)| *h)
            .fold(0.0_f64, f64::max);
        let mut new_heights = self.heights.clone();
        for iy in 0..self.ny {
            for ix in 0..self.nx {
                let i = iy * self.nx + ix;
                if self.walkable[i] {
                    continue;
                }
                let mut local_max = f64::NEG_INFINITY;
                let y_lo = (iy as isize - radius).max(0) as usize;
                let y_hi = ((iy as isize + radius) as usize).min(self.ny - 1);
                let x_lo = (ix as isize - radius).max(0) as usize;
                let x_hi = ((ix as isize + radius) as usize).min(self.nx - 1);
                for wy in y_lo..=y_hi {
                    for wx in x_lo..=x_hi {
                        let j = wy * self.nx + wx;
                        if self.walkable[j] && self.heights[j] > local_max {
                            local_max = self.heights[j];
                        }
                    }
                }
                if !local_max.is_finite() {
                    local_max = global_max;
                }
                new_heights[i] = local_max + wall_height;
            }
        }
        self.heights = new_heights;
    }

    #[allow(clippy::too_many_arguments)]
    fn build(
        self,
        spawn: SpawnPose,
        goal_xy_yaw: (f64, f64, f64),
        centerline: Centerline,
        spec: StairSpec,
        seed: u64,
    ) -> Result<HeightField> {
        let (gx, gy, gyaw) = goal_xy_yaw;
        let ix = ((gx / self.cell) as usize).min(self.nx - 1);
        let iy = ((gy / self.cell) as usize).min(self.ny - 1);
        let gz = self.heights[iy * self.nx + ix];
        HeightField::from_parts(
            self.cell,
            self.nx,
            self.ny,
            (0.0, 0.0),
            self.heights,
            self.mask,
            spawn,
            GoalPose { x: gx, y: gy, z: gz, yaw: gyaw },
            centerline,
            spec,
            seed,
        )
    }
}

/// Generate the heightfield for a stair spec.
///
/// The `seed` is stored in the field and reserved for future randomized
/// variants; current layouts are fully determined by `(spec, params)`.
pub fn generate(spec: &StairSpec, seed: u64, params: &TerrainParams) -> Result<HeightField> {
    spec.validate()?;
    match spec.kind {
        StairKind::Straight => generate_straight(spec, seed, params),
        StairKind::UShaped => generate_u_shaped(spec, seed, params),
        StairKind::LShaped => generate_l_shaped(spec, seed, params),
        StairKind::Spiral => generate_spiral(spec, seed, params),
        StairKind::Pyramid => generate_pyramid(spec, seed, params),
    }
}

fn generate_straight(spec: &StairSpec, seed: u64, params: &TerrainParams) -> Result<HeightField> {
    let n = spec.steps_per_run;
    let h = spec.riser_height;
    let t = spec.tread_depth;
    let w = spec.stair_width;
    let apron = params.apron_length;
    let margin = params.side_margin;
    let run = n as f64 * t;
    let total_x = apron + run + apron;
    let total_y = w + 2.0 * margin;

    let mut g = GridBuilder::new(total_x, total_y, params)?;
    let y0 = margin;
    let y1 = margin + w;
    for j in 1..=n {
        let x0 = apron + (j - 1) as f64 * t;
        g.paint_rect(x0, x0 + t, y0, y1, j as f64 * h, CellKind::Tread);
    }
    g.paint_rect(apron + run, total_x, y0, y1, n as f64 * h, CellKind::Landing);

    let y_mid = margin + w / 2.0;
    let spawn = SpawnPose { x: apron / 2.0, y: y_mid, yaw: 0.0 };
    let goal = (apron + run + apron / 2.0, y_mid, 0.0);
    let centerline = Centerline::new(vec![(spawn.x, y_mid), (goal.0, y_mid)])?;
    g.build(spawn, goal, centerline, spec.clone(), seed)
}

fn generate_u_shaped(spec: &StairSpec, seed: u64, params: &TerrainParams) -> Result<HeightField> {
    let n = spec.steps_per_run;
    let h = spec.riser_height;
    let t = spec.tread_depth;
    let w = spec.stair_width;
    let apron = params.apron_length;
    let wt = WALL_THICKNESS;
    let land = spec.landing_depth;
    let run = n as f64 * t;
    let total_x = apron + run + land + wt;
    let total_y = 3.0 * wt + 2.0 * w;

    let mut g = GridBuilder::new(total_x, total_y, params)?;
    let ya0 = wt; // channel A (ascending +x)
    let ya1 = wt + w;
    let yb0 = wt + w + wt; // channel B (ascending -x)
    let yb1 = wt + w + wt + w;

    // Channel A: apron then first run.
    g.paint_rect(0.0, apron, ya0, ya1, 0.0, CellKind::Ground);
    for j in 1..=n {
        let x0 = apron + (j - 1) as f64 * t;
        g.paint_rect(x0, x0 + t, ya0, ya1, j as f64 * h, CellKind::Tread);
    }
    // Turn landing spans both channels and the divider.
    g.paint_rect(apron + run, apron + run + land, ya0, yb1, n as f64 * h, CellKind::Landing);
    // Channel B: second run back toward -x, then the goal landing.
    for j in 1..=n {
        let x1 = apron + run - (j - 1) as f64 * t;
        g.paint_rect(x1 - t, x1, yb0, yb1, (n + j) as f64 * h, CellKind::Tread);
    }
    g.paint_rect(wt, apron, yb0, yb1, (2 * n) as f64 * h, CellKind::Landing);

    // Walls: outer ring (entrance open), divider, near-end cap of channel B.
    g.mark_wall_rect(0.0, total_x, 0.0, wt);
    g.mark_wall_rect(0.0, total_x, yb1, total_y);
    g.mark_wall_rect(apron + run + land, total_x, 0.0, total_y);
    g.mark_wall_rect(0.0, apron + run, ya1, yb0);
    g.mark_wall_rect(0.0, wt, yb0, yb1);
    g.finalize_walls(spec.wall_height);

    let ya = wt + w / 2.0;
    let yb = yb0 + w / 2.0;
    let x_turn = apron + run + land / 2.0;
    let spawn = SpawnPose { x: apron / 2.0, y: ya, yaw: 0.0 };
    let goal = ((wt + apron) / 2.0, yb, std::f64::consts::PI);
    let centerline = Centerline::new(vec![
        (spawn.x, ya),
        (x_turn, ya),
        (x_turn, yb),
        (goal.0, yb),
    ])?;
    g.build(spawn, goal, centerline, spec.clone(), seed)
}

fn generate_l_shaped(spec: &StairSpec, seed: u64, params: &TerrainParams) -> Result<HeightField> {
    let n = spec.steps_per_run;
    let h = spec.riser_height;
    let t = spec.tread_depth;
    let w = spec.stair_width;
    let apron = params.apron_length;
    let wt = WALL_THICKNESS;
    let run = n as f64 * t;
    let xc = apron + run; // corner square west edge
    let total_x = xc + w + wt;
    let total_y = wt + w + run + apron + wt;

    let mut g = GridBuilder::new(total_x, total_y, params)?;
    let ya0 = wt;
    let ya1 = wt + w;

    // Run 1 along +x.
    g.paint_rect(0.0, apron, ya0, ya1, 0.0, CellKind::Ground);
    for j in 1..=n {
        let x0 = apron + (j - 1) as f64 * t;
        g.paint_rect(x0, x0 + t, ya0, ya1, j as f64 * h, CellKind::Tread);
    }
    // Corner landing square.
    g.paint_rect(xc, xc + w, ya0, ya1, n as f64 * h, CellKind::Landing);
    // Run 2 along +y, then the goal landing.
    for j in 1..=n {
        let y0 = ya1 + (j - 1) as f64 * t;
        g.paint_rect(xc, xc + w, y0, y0 + t, (n + j) as f64 * h, CellKind::Tread);
    }
    g.paint_rect(xc, xc + w, ya1 + run, ya1 + run + apron, (2 * n) as f64 * h, CellKind::Landing);

    // Walls around the L; the entrance at x = 0 stays open.
    g.mark_wall_rect(0.0, total_x, 0.0, wt);
    g.mark_wall_rect(xc + w, total_x, 0.0, total_y);
    g.mark_wall_rect(0.0, xc - wt, ya1, ya1 + wt);
    g.mark_wall_rect(xc - wt, xc, ya1, total_y);
    g.mark_wall_rect(xc, xc + w, ya1 + run + apron, total_y);
    g.finalize_walls(spec.wall_height);

    let ya = wt + w / 2.0;
    let x2 = xc + w / 2.0;
    let spawn = SpawnPose { x: apron / 2.0, y: ya, yaw: 0.0 };
    let goal = (x2, ya1 + run + apron / 2.0, std::f64::consts::FRAC_PI_2);
    let centerline = Centerline::new(vec![(spawn.x, ya), (x2, ya), (x2, goal.1)])?;
    g.build(spawn, goal, centerline, spec.clone(), seed)
}

fn generate_spiral(spec: &StairSpec, seed: u64, params: &TerrainParams) -> Result<HeightField> {
    use std::f64::consts::PI;
    let n = spec.steps_per_run;
    let h = spec.riser_height;
    let w = spec.stair_width;
    let wt = WALL_THICKNESS;
    let r_in = spec.spiral_inner_radius;
    let r_out = r_in + w;
    let r_mid = r_in + w / 2.0;
    let turn = spec.spiral_total_turn;
    let arc_apron = SPIRAL_FLAT_ARC / r_mid;
    let arc_land = SPIRAL_FLAT_ARC / r_mid;
    let swept = arc_apron + turn + arc_land;
    if swept > 2.0 * PI - 0.05 {
        return Err(Error::Terrain(format!(
            "spiral sweep {swept:.3} rad (turn + apron + landing) exceeds one revolution"
        )));
    }
    let half = r_out + wt + 0.5;
    let side = 2.0 * half;
    let mut g = GridBuilder::new(side, side, params)?;
    let (cx, cy) = (half, half);
    // The sweep starts at angle 0 with the apron sector; ascent is
    // counterclockwise.
    let step_arc = turn / n as f64;

    for iy in 0..g.ny {
        for ix in 0..g.nx {
            let (px, py) = g.center(ix, iy);
            let (dx, dy) = (px - cx, py - cy);
            let r = (dx * dx + dy * dy).sqrt();
            if r >= r_out + wt {
                continue; // outside ground, stays flat
            }
            if r < r_in || r >= r_out {
                g.set(ix, iy, 0.0, CellKind::Wall); // column / outer ring
                continue;
            }
            let rel = dy.atan2(dx).rem_euclid(2.0 * PI);
            if rel < arc_apron {
                g.set(ix, iy, 0.0, CellKind::Ground);
            } else if rel < arc_apron + turn {
                let j = (((rel - arc_apron) / step_arc) as usize + 1).min(n);
                g.set(ix, iy, j as f64 * h, CellKind::Tread);
            } else if rel < swept {
                g.set(ix, iy, n as f64 * h, CellKind::Landing);
            } else {
                g.set(ix, iy, 0.0, CellKind::Wall); // unused sector
            }
        }
    }
    g.finalize_walls(spec.wall_height);

    let polar = |ang: f64| (cx + r_mid * ang.cos(), cy + r_mid * ang.sin());
    let spawn_ang = arc_apron / 2.0;
    let goal_ang = arc_apron + turn + arc_land / 2.0;
    let (sx, sy) = polar(spawn_ang);
    let (gx, gy) = polar(goal_ang);
    let spawn = SpawnPose { x: sx, y: sy, yaw: spawn_ang + PI / 2.0 };
    let goal = (gx, gy, wrap_angle(goal_ang + PI / 2.0));

    let mut pts = Vec::new();
    let step = 0.08;
    let mut ang = spawn_ang;
    while ang < goal_ang {
        pts.push(polar(ang));
        ang += step;
    }
    pts.push(polar(goal_ang));
    let centerline = Centerline::new(pts)?;
    g.build(spawn, goal, centerline, spec.clone(), seed)
}

fn generate_pyramid(spec: &StairSpec, seed: u64, params: &TerrainParams) -> Result<HeightField> {
    let n = spec.steps_per_run;
    let h = spec.riser_height;
    let t = spec.tread_depth;
    let plateau = params.pyramid_plateau_half;
    let apron = params.apron_length;
    let base_half = plateau + n as f64 * t;
    let half = base_half + apron;
    let side = 2.0 * half;

    let mut g = GridBuilder::new(side, side, params)?;
    let (cx, cy) = (half, half);
    for iy in 0..g.ny {
        for ix in 0..g.nx {
            let (px, py) = g.center(ix, iy);
            let cheb = (px - cx).abs().max((py - cy).abs());
            if cheb <= plateau {
                g.set(ix, iy, n as f64 * h, CellKind::Landing);
            } else if cheb < base_half {
                let j = ((cheb - plateau) / t) as usize; // rings outward: n*h down to h
                g.set(ix, iy, (n - j.min(n - 1)) as f64 * h, CellKind::Tread);
            }
        }
    }

    let spawn = SpawnPose { x: cx - base_half - apron / 2.0, y: cy, yaw: 0.0 };
    let goal = (cx, cy, 0.0);
    let centerline = Centerline::new(vec![(spawn.x, cy), (cx, cy)])?;
    g.build(spawn, goal, centerline, spec.clone(), seed)
}

fn wrap_angle(a: f64) -> f64 {
    use std::f64::consts::PI;
    let mut a = (a + PI).rem_euclid(2.0 * PI) - PI;
    if a <= -PI {
        a += 2.0 * PI;
    }
    a
}

//! Reduced-order legged surrogate environment.
//!
//! The surrogate replaces rigid-body physics with a kinematic body that
//! glides over the heightfield at commanded velocities, while a first-order
//! joint model supplies the joint positions, velocities, and torques the
//! regularization penalties consume. Climb feasibility is gated on step
//! height, approach speed, and heading against the local ascent direction,
//! so taller risers and misaligned approaches genuinely fail.
//!
//! Observation layout (490 values):
//! `[0:3]` body linear velocity, `[3:6]` body angular velocity, `[6:9]`
//! gravity direction in the body frame, `[9:21]` joint positions, `[21:33]`
//! joint velocities, `[33:45]` previous action, `[45:49]` goal pose in the
//! body frame (x, y, z, yaw error), `[49:490]` the 21x21 height scan.

pub mod scripted;
mod vec_env;

pub use vec_env::{StepResult, VecEnv};

use std::sync::Arc;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::net::{ACTION_DIM, OBS_DIM};
use crate::rewards::{self, RewardConfig, RewardTerms, Stage, TermValues, JOINT_COUNT};
use crate::rng::{seeded_rng, streams};
use crate::terrain::{HeightField, HEIGHTMAP_CELLS};
use crate::Result;

pub mod obs_layout {
    pub const LIN_VEL: std::ops::Range<usize> = 0..3;
    pub const ANG_VEL: std::ops::Range<usize> = 3..6;
    pub const GRAVITY: std::ops::Range<usize> = 6..9;
    pub const JOINT_POS: std::ops::Range<usize> = 9..21;
    pub const JOINT_VEL: std::ops::Range<usize> = 21..33;
    pub const LAST_ACTION: std::ops::Range<usize> = 33..45;
    pub const GOAL: std::ops::Range<usize> = 45..49;
    pub const HEIGHTMAP: std::ops::Range<usize> = 49..490;
}

/// Per-step outcome classification. Terminal events end the episode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepEvent {
    Running,
    GoalReached,
    Fell,
    OutOfBounds,
    Timeout,
}

impl StepEvent {
    pub fn is_terminal(&self) -> bool {
        *self != StepEvent::Running
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            StepEvent::Running => "running",
            StepEvent::GoalReached => "goal_reached",
            StepEvent::Fell => "fell",
            StepEvent::OutOfBounds => "out_of_bounds",
            StepEvent::Timeout => "timeout",
        }
    }
}

/// Surrogate dynamics constants. All config-overridable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EnvParams {
    /// Control period, seconds.
    pub dt: f64,
    /// Standing height of the base above terrain, meters.
    pub h_stand: f64,
    pub v_max: f64,
    pub v_lat_max: f64,
    pub omega_max: f64,
    /// Joint first-order lag time constant, seconds.
    pub tau_joint: f64,
    pub k_p: f64,
    pub k_d: f64,
    /// Largest single step height the surrogate can climb, meters.
    pub climb_max: f64,
    /// Minimum approach speed for a climb, m/s.
    pub climb_min_speed: f64,
    /// Maximum angle between heading and the local ascent direction, radians.
    pub climb_heading_max: f64,
    /// Drop beyond which stepping down counts as a fall, meters.
    pub drop_max: f64,
    /// Entering a cell more than this much above the supporting terrain is
    /// blocked (wall rule), meters.
    pub wall_block: f64,
    pub goal_radius: f64,
    pub goal_yaw_tol: f64,
    pub timeout_steps: u32,
    pub spawn_jitter_xy: f64,
    pub spawn_jitter_yaw: f64,
    /// Lattice spacing of the local height scan, meters.
    pub heightmap_spacing: f64,
}

impl Default for EnvParams {
    fn default() -> Self {
        EnvParams {
            dt: 0.05,
            h_stand: 0.35,
            v_max: 1.0,
            v_lat_max: 0.4,
            omega_max: 1.5,
            tau_joint: 0.2,
            k_p: 20.0,
            k_d: 0.5,
            climb_max: 0.22,
            climb_min_speed: 0.2,
            climb_heading_max: 30.0_f64.to_radians(),
            drop_max: 0.45,
            wall_block: 0.5,
            goal_radius: 0.5,
            goal_yaw_tol: 0.5,
            timeout_steps: 400,
            spawn_jitter_xy: 0.1,
            spawn_jitter_yaw: 0.1,
            heightmap_spacing: 0.10,
        }
    }
}

/// Full mutable state of one agent.
#[derive(Debug, Clone, PartialEq)]
pub struct AgentState {
    pub pos: [f64; 3],
    pub yaw: f64,
    pub lin_vel_body: [f64; 3],
    pub yaw_rate: f64,
    pub joints: [f64; JOINT_COUNT],
    pub joint_vel: [f64; JOINT_COUNT],
    pub last_action: [f64; JOINT_COUNT],
    pub step_count: u32,
    pub level: u32,
}

/// Map a (clamped) 12-d joint-position action onto body velocity commands.
///
/// Forward, lateral, and yaw-rate channels are driven by the means of the
/// three action groups through a tanh squash.
pub fn action_to_command(action: &[f64; ACTION_DIM], p: &EnvParams) -> (f64, f64, f64) {
    let mean4 = |s: &[f64]| -> f64 {
        s.iter().map(|a| a.clamp(-1.0, 1.0)).sum::<f64>() / 4.0
    };
    (
        p.v_max * mean4(&action[0..4]).tanh(),
        p.v_lat_max * mean4(&action[4..8]).tanh(),
        p.omega_max * mean4(&action[8..12]).tanh(),
    )
}

/// First-order joint lag toward the commanded positions.
///
/// Returns `(joints', joint_vel', torque)` where the torque is a PD response
/// to the tracking error.
pub fn joint_dynamics(
    joints: &[f64; JOINT_COUNT],
    action: &[f64; JOINT_COUNT],
    dt: f64,
    p: &EnvParams,
) -> ([f64; JOINT_COUNT], [f64; JOINT_COUNT], [f64; JOINT_COUNT]) {
    debug_assert!(dt > 0.0);
    let mut new_joints = [0.0; JOINT_COUNT];
    let mut new_vel = [0.0; JOINT_COUNT];
    let mut torque = [0.0; JOINT_COUNT];
    for j in 0..JOINT_COUNT {
        let err = action[j] - joints[j];
        new_vel[j] = err / p.tau_joint;
        new_joints[j] = joints[j] + new_vel[j] * dt;
        torque[j] = p.k_p * err - p.k_d * new_vel[j];
    }
    (new_joints, new_vel, torque)
}

/// Result of one kinematic transition attempt.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transition {
    pub x: f64,
    pub y: f64,
    pub yaw: f64,
    pub blocked: bool,
    pub fell: bool,
    pub out_of_grid: bool,
}

/// Attempt one body move over the heightfield.
///
/// Ascending moves succeed only when the step height is within `climb_max`,
/// the commanded speed reaches `climb_min_speed`, and the heading lies within
/// `climb_heading_max` of the local ascent direction; otherwise the move is
/// blocked in place. Dropping more than `drop_max` (or leaving the grid) is a
/// fall. Yaw integrates regardless.
pub fn terrain_transition(
    x: f64,
    y: f64,
    yaw: f64,
    cmd: (f64, f64, f64),
    hf: &HeightField,
    dt: f64,
    p: &EnvParams,
) -> Transition {
    let (vx, vy, wz) = cmd;
    let new_yaw = wrap_angle(yaw + wz * dt);
    let (sin_yaw, cos_yaw) = yaw.sin_cos();
    let dx = (cos_yaw * vx - sin_yaw * vy) * dt;
    let dy = (sin_yaw * vx + cos_yaw * vy) * dt;
    let (nx, ny) = (x + dx, y + dy);

    if dx == 0.0 && dy == 0.0 {
        return Transition { x, y, yaw: new_yaw, blocked: false, fell: false, out_of_grid: false };
    }
    if !hf.contains(nx, ny) {
        return Transition { x: nx, y: ny, yaw: new_yaw, blocked: false, fell: true, out_of_grid: true };
    }
    let h_old = hf.sample_height(x, y);
    let h_new = hf.sample_height(nx, ny);
    let dh = h_new - h_old;

    if dh > 0.0 {
        let speed = (vx * vx + vy * vy).sqrt();
        let blocked = dh > p.climb_max
            || dh > p.wall_block
            || speed < p.climb_min_speed
            || !heading_aligned_with_ascent(x, y, nx, ny, dx, dy, hf, p);
        if blocked {
            return Transition { x, y, yaw: new_yaw, blocked: true, fell: false, out_of_grid: false };
        }
    } else if -dh > p.drop_max {
        return Transition { x: nx, y: ny, yaw: new_yaw, blocked: false, fell: true, out_of_grid: false };
    }
    Transition { x: nx, y: ny, yaw: new_yaw, blocked: false, fell: false, out_of_grid: false }
}

/// Estimate the local ascent direction near the crossing and compare it with
/// the movement direction.
///
/// The ascent direction is the first circular moment of terrain heights on a
/// small ring around the crossing midpoint; for a stair riser it points
/// uphill, perpendicular to the edge. Degenerate moments (flat ring) accept
/// the move.
#[allow(clippy::too_many_arguments)]
fn heading_aligned_with_ascent(
    x: f64,
    y: f64,
    nx: f64,
    ny: f64,
    dx: f64,
    dy: f64,
    hf: &HeightField,
    p: &EnvParams,
) -> bool {
    let (mx, my) = ((x + nx) / 2.0, (y + ny) / 2.0);
    let radius = (2.4 * hf.cell_size).max(0.12);
    let mut gx = 0.0;
    let mut gy = 0.0;
    const DIRS: usize = 16;
    for k in 0..DIRS {
        let ang = 2.0 * std::f64::consts::PI * k as f64 / DIRS as f64;
        let (s, c) = ang.sin_cos();
        let h = hf.sample_height(mx + radius * c, my + radius * s);
        // Clamp void samples so an off-grid ring point cannot dominate.
        let h = h.max(-1.0);
        gx += h * c;
        gy += h * s;
    }
    let norm = (gx * gx + gy * gy).sqrt();
    if norm < 1e-9 {
        return true;
    }
    let dn = (dx * dx + dy * dy).sqrt();
    let cos_angle = (dx * gx + dy * gy) / (dn * norm);
    cos_angle >= p.climb_heading_max.cos()
}

pub fn wrap_angle(a: f64) -> f64 {
    use std::f64::consts::PI;
    let mut a = (a + PI).rem_euclid(2.0 * PI) - PI;
    if a <= -PI {
        a += 2.0 * PI;
    }
    a
}

/// One agent in its terrain. Single-owner mutable state; batches of envs may
/// step in parallel because each env only touches itself and its (shared,
/// read-only) heightfield.
#[derive(Debug, Clone)]
pub struct SurrogateEnv {
    terrain: Arc<HeightField>,
    params: EnvParams,
    reward_cfg: RewardConfig,
    state: AgentState,
    prev_arclength: f64,
    env_id: usize,
    episode_index: u64,
}

/// Everything one step produces.
#[derive(Debug, Clone)]
pub struct StepOutcome {
    pub terms: RewardTerms,
    pub event: StepEvent,
    /// Realized horizontal speed, m/s (for stall diagnostics).
    pub speed: f64,
    pub in_goal_region: bool,
}

impl SurrogateEnv {
    pub fn new(
        env_id: usize,
        terrain: Arc<HeightField>,
        level: u32,
        params: EnvParams,
        mut reward_cfg: RewardConfig,
    ) -> Self {
        reward_cfg.sigma_center = terrain.spec.stair_width / 4.0;
        let state = AgentState {
            pos: [terrain.spawn_pose.x, terrain.spawn_pose.y, 0.0],
            yaw: terrain.spawn_pose.yaw,
            lin_vel_body: [0.0; 3],
            yaw_rate: 0.0,
            joints: [0.0; JOINT_COUNT],
            joint_vel: [0.0; JOINT_COUNT],
            last_action: [0.0; JOINT_COUNT],
            step_count: 0,
            level,
        };
        SurrogateEnv { terrain, params, reward_cfg, state, prev_arclength: 0.0, env_id, episode_index: 0 }
    }

    pub fn state(&self) -> &AgentState {
        &self.state
    }

    pub fn terrain(&self) -> &HeightField {
        &self.terrain
    }

    pub fn level(&self) -> u32 {
        self.state.level
    }

    pub fn reward_config(&self) -> &RewardConfig {
        &self.reward_cfg
    }

    /// Place the agent at the spawn with seeded jitter; write the first
    /// observation of the episode into `obs`.
    pub fn reset(&mut self, terrain: Arc<HeightField>, level: u32, seed: u64, obs: &mut [f64]) {
        self.terrain = terrain;
        self.reward_cfg.sigma_center = self.terrain.spec.stair_width / 4.0;
        self.state.level = level;
        self.episode_index += 1;
        let mut rng: ChaCha8Rng = seeded_rng(seed, streams::ENV_RESET, self.env_id as u64);
        let p = &self.params;
        let spawn = self.terrain.spawn_pose;
        let x = spawn.x + rng.gen_range(-p.spawn_jitter_xy..=p.spawn_jitter_xy);
        let y = spawn.y + rng.gen_range(-p.spawn_jitter_xy..=p.spawn_jitter_xy);
        let yaw = wrap_angle(spawn.yaw + rng.gen_range(-p.spawn_jitter_yaw..=p.spawn_jitter_yaw));
        let z = self.terrain.sample_height(x, y) + p.h_stand;
        self.state.pos = [x, y, z];
        self.state.yaw = yaw;
        self.state.lin_vel_body = [0.0; 3];
        self.state.yaw_rate = 0.0;
        self.state.joints = [0.0; JOINT_COUNT];
        self.state.joint_vel = [0.0; JOINT_COUNT];
        self.state.last_action = [0.0; JOINT_COUNT];
        self.state.step_count = 0;
        self.prev_arclength = self.terrain.centerline_progress(x, y).0;
        let (gx, gy) = (self.terrain.goal_pose.x, self.terrain.goal_pose.y);
        self.reward_cfg.d_far = ((gx - x).powi(2) + (gy - y).powi(2)).sqrt().max(1e-6);
        self.write_obs(obs);
    }

    /// Advance one control step; writes the next observation into `obs`.
    pub fn step(&mut self, action: &[f64; ACTION_DIM], obs: &mut [f64]) -> Result<StepOutcome> {
        let p = self.params.clone();
        let mut a = *action;
        for v in &mut a {
            if !v.is_finite() {
                return Err(Error::Env("non-finite action".into()));
            }
            *v = v.clamp(-1.0, 1.0);
        }

        let prev_vel = self.state.joint_vel;
        let (new_joints, new_vel, torque) = joint_dynamics(&self.state.joints, &a, p.dt, &p);
        let mut joint_acc = [0.0; JOINT_COUNT];
        for j in 0..JOINT_COUNT {
            joint_acc[j] = (new_vel[j] - prev_vel[j]) / p.dt;
        }

        let cmd = action_to_command(&a, &p);
        let [x0, y0, z0] = self.state.pos;
        let trans = terrain_transition(x0, y0, self.state.yaw, cmd, &self.terrain, p.dt, &p);

        let (nx, ny) = if trans.blocked { (x0, y0) } else { (trans.x, trans.y) };
        let nz = if trans.out_of_grid {
            z0
        } else {
            self.terrain.sample_height(nx, ny) + p.h_stand
        };
        let new_yaw = trans.yaw;

        // Realized body velocities at the new heading. Blocked moves zero out.
        let (dx, dy, dz) = (nx - x0, ny - y0, nz - z0);
        let (sin_yaw, cos_yaw) = new_yaw.sin_cos();
        let vx_b = (cos_yaw * dx + sin_yaw * dy) / p.dt;
        let vy_b = (-sin_yaw * dx + cos_yaw * dy) / p.dt;
        let vz = dz / p.dt;
        let speed = (dx * dx + dy * dy).sqrt() / p.dt;

        self.state.pos = [nx, ny, nz];
        self.state.yaw = new_yaw;
        self.state.lin_vel_body = [vx_b, vy_b, vz];
        self.state.yaw_rate = cmd.2;
        self.state.joints = new_joints;
        self.state.joint_vel = new_vel;
        self.state.step_count += 1;

        let goal = self.terrain.goal_pose;
        let goal_dist = ((goal.x - nx).powi(2) + (goal.y - ny).powi(2)).sqrt();
        let yaw_err = wrap_angle(goal.yaw - new_yaw);
        let in_goal = goal_dist <= p.goal_radius;

        let event = if trans.fell {
            if trans.out_of_grid {
                StepEvent::OutOfBounds
            } else {
                StepEvent::Fell
            }
        } else if in_goal && yaw_err.abs() <= p.goal_yaw_tol {
            StepEvent::GoalReached
        } else if self.state.step_count >= p.timeout_steps {
            StepEvent::Timeout
        } else {
            StepEvent::Running
        };

        let mut values = TermValues {
            goal_reached: event == StepEvent::GoalReached,
            stall: rewards::stall_penalty(speed, in_goal, &self.reward_cfg),
            penalties: rewards::regularization(
                &torque,
                &new_vel,
                &joint_acc,
                &a,
                &self.state.last_action,
                &new_joints,
                &self.reward_cfg,
            ),
            ..Default::default()
        };
        match self.reward_cfg.stage {
            Stage::Stage1 => {
                let (far, near) = rewards::nav_rewards(goal_dist, &self.reward_cfg)?;
                values.nav_far = far;
                values.nav_near = near;
            }
            Stage::Stage2 => {
                let (s, lateral) = self.terrain.centerline_progress(nx, ny);
                let (path, center) = rewards::stage2_task(s - self.prev_arclength, lateral, &self.reward_cfg);
                self.prev_arclength = s;
                values.path = path;
                values.centering = center;
            }
        }
        let terms = rewards::total(&values, &self.reward_cfg)?;

        self.state.last_action = a;
        self.write_obs(obs);
        Ok(StepOutcome { terms, event, speed, in_goal_region: in_goal })
    }

    /// Compose the 490-d observation for the current state into `obs`.
    pub fn write_obs(&self, obs: &mut [f64]) {
        assert_eq!(obs.len(), OBS_DIM);
        let s = &self.state;
        let p = &self.params;
        obs[obs_layout::LIN_VEL].copy_from_slice(&s.lin_vel_body);
        obs[obs_layout::ANG_VEL].copy_from_slice(&[0.0, 0.0, s.yaw_rate]);
        obs[obs_layout::GRAVITY].copy_from_slice(&[0.0, 0.0, -1.0]);
        obs[obs_layout::JOINT_POS].copy_from_slice(&s.joints);
        obs[obs_layout::JOINT_VEL].copy_from_slice(&s.joint_vel);
        obs[obs_layout::LAST_ACTION].copy_from_slice(&s.last_action);

        let goal = self.terrain.goal_pose;
        let (dx, dy) = (goal.x - s.pos[0], goal.y - s.pos[1]);
        let (sin_yaw, cos_yaw) = s.yaw.sin_cos();
        let base_height = s.pos[2] - p.h_stand;
        obs[obs_layout::GOAL].copy_from_slice(&[
            cos_yaw * dx + sin_yaw * dy,
            -sin_yaw * dx + cos_yaw * dy,
            goal.z - base_height,
            wrap_angle(goal.yaw - s.yaw),
        ]);
        let hm = self.terrain.local_heightmap(
            s.pos[0],
            s.pos[1],
            s.pos[2],
            s.yaw,
            p.heightmap_spacing,
        );
        debug_assert_eq!(HEIGHTMAP_CELLS, hm.len());
        obs[obs_layout::HEIGHTMAP].copy_from_slice(&hm);
    }

    /// Episode counter, advanced on every reset (used for seed derivation).
    pub fn episode_index(&self) -> u64 {
        self.episode_index
    }
}

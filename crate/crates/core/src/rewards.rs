//! Per-step reward composition: stage-dependent task rewards, six
//! regularization penalties, and the stall penalty.
//!
//! The total is `r_task + sum(lambda_i * r_i)` with all penalty weights
//! negative and the stall term already carrying its negative value.

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::Result;

pub const JOINT_COUNT: usize = 12;

/// Which task-reward family is active.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    /// Navigation rewards (far + near goal tracking).
    Stage1,
    /// Centering + path-progress rewards.
    Stage2,
}

impl Stage {
    pub fn as_str(&self) -> &'static str {
        match self {
            Stage::Stage1 => "stage1",
            Stage::Stage2 => "stage2",
        }
    }
}

/// Term weights. Penalty weights are stored negative; the stall weight scales
/// a value that is already negative.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RewardWeights {
    pub nav_far: f64,
    pub nav_near: f64,
    pub centering: f64,
    pub path: f64,
    pub goal_bonus: f64,
    pub power: f64,
    pub torque: f64,
    pub action_rate: f64,
    pub joint_limit: f64,
    pub joint_vel: f64,
    pub joint_acc: f64,
    pub stall: f64,
}

impl Default for RewardWeights {
    fn default() -> Self {
        RewardWeights {
            nav_far: 1.0,
            nav_near: 1.5,
            centering: 0.5,
            path: 10.0,
            goal_bonus: 10.0,
            power: -2e-4,
            torque: -1e-4,
            action_rate: -0.01,
            joint_limit: -1.0,
            joint_vel: -1e-4,
            joint_acc: -2.5e-7,
            stall: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RewardConfig {
    pub stage: Stage,
    pub weights: RewardWeights,
    /// Speed below which the stall penalty applies (strict), m/s.
    pub stall_speed_threshold: f64,
    /// Constant per-step stall reward (negative).
    pub stall_penalty_value: f64,
    /// Navigation range of the far reward; set per episode to the
    /// spawn-goal distance.
    pub d_far: f64,
    /// Length scale of the near-goal reward, meters.
    pub sigma_near: f64,
    /// Length scale of the centering reward; stair_width / 4 by convention.
    pub sigma_center: f64,
    /// Joint angle beyond which the limit penalty engages, radians.
    pub joint_limit_rad: f64,
}

impl Default for RewardConfig {
    fn default() -> Self {
        RewardConfig {
            stage: Stage::Stage1,
            weights: RewardWeights::default(),
            stall_speed_threshold: 0.3,
            stall_penalty_value: -1.0,
            d_far: 8.0,
            sigma_near: 0.5,
            sigma_center: 0.4,
            joint_limit_rad: 1.2,
        }
    }
}

impl RewardConfig {
    pub fn validate(&self) -> Result<()> {
        let w = &self.weights;
        for (name, v) in [
            ("power", w.power),
            ("torque", w.torque),
            ("action_rate", w.action_rate),
            ("joint_limit", w.joint_limit),
            ("joint_vel", w.joint_vel),
            ("joint_acc", w.joint_acc),
        ] {
            if v > 0.0 {
                return Err(Error::Rewards(format!("penalty weight {name} must be <= 0, got {v}")));
            }
        }
        if self.stall_penalty_value > 0.0 {
            return Err(Error::Rewards("stall_penalty_value must be <= 0".into()));
        }
        if self.weights.stall < 0.0 {
            return Err(Error::Rewards("stall weight scales a negative value; keep it >= 0".into()));
        }
        Ok(())
    }
}

/// Unweighted term values for one step, plus the weighted total.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct RewardTerms {
    pub nav_far: f64,
    pub nav_near: f64,
    pub path: f64,
    pub centering: f64,
    pub goal_reached: bool,
    pub power: f64,
    pub torque: f64,
    pub action_rate: f64,
    pub joint_limit: f64,
    pub joint_vel: f64,
    pub joint_acc: f64,
    pub stall: f64,
    pub total: f64,
}

impl RewardTerms {
    pub const CSV_HEADER: &'static str = "r_nav_far,r_nav_near,r_path,r_center,r_power,r_torque,r_action_rate,r_joint_limit,r_joint_vel,r_joint_acc,r_stall";

    /// Raw term values in the CSV header's order (for per-term logging).
    pub fn as_log_row(&self) -> [f64; 11] {
        [
            self.nav_far,
            self.nav_near,
            self.path,
            self.centering,
            self.power,
            self.torque,
            self.action_rate,
            self.joint_limit,
            self.joint_vel,
            self.joint_acc,
            self.stall,
        ]
    }
}

/// Stage-1 navigation rewards over goal distance `d`.
///
/// `r_far` decays linearly over the episode's spawn-goal range; `r_near` is a
/// Gaussian bump for close-in tracking.
pub fn nav_rewards(d: f64, cfg: &RewardConfig) -> Result<(f64, f64)> {
    if cfg.d_far <= 0.0 {
        return Err(Error::Rewards("d_far must be > 0".into()));
    }
    let r_far = 1.0 - (d / cfg.d_far).min(1.0);
    let r_near = (-(d * d) / (cfg.sigma_near * cfg.sigma_near)).exp();
    Ok((r_far, r_near))
}

/// Stage-2 task rewards: clamped arclength progress and centerline tracking.
pub fn stage2_task(progress: f64, lateral_offset: f64, cfg: &RewardConfig) -> (f64, f64) {
    let r_path = progress.clamp(-0.2, 0.2);
    let r_center =
        (-(lateral_offset * lateral_offset) / (cfg.sigma_center * cfg.sigma_center)).exp();
    (r_path, r_center)
}

/// Constant negative reward for moving below the stall threshold outside the
/// goal region; zero otherwise. The threshold comparison is strict.
pub fn stall_penalty(speed: f64, in_goal_region: bool, cfg: &RewardConfig) -> f64 {
    if speed < cfg.stall_speed_threshold && !in_goal_region {
        cfg.stall_penalty_value
    } else {
        0.0
    }
}

/// The six regularization penalties, all non-negative before weighting.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RegPenalties {
    pub power: f64,
    pub torque: f64,
    pub action_rate: f64,
    pub joint_limit: f64,
    pub joint_vel: f64,
    pub joint_acc: f64,
}

pub fn regularization(
    torque: &[f64; JOINT_COUNT],
    joint_vel: &[f64; JOINT_COUNT],
    joint_acc: &[f64; JOINT_COUNT],
    action: &[f64; JOINT_COUNT],
    prev_action: &[f64; JOINT_COUNT],
    joints: &[f64; JOINT_COUNT],
    cfg: &RewardConfig,
) -> RegPenalties {
    let mut p = RegPenalties::default();
    for j in 0..JOINT_COUNT {
        p.power += (torque[j] * joint_vel[j]).abs();
        p.torque += torque[j] * torque[j];
        let da = action[j] - prev_action[j];
        p.action_rate += da * da;
        let over = (joints[j].abs() - cfg.joint_limit_rad).max(0.0);
        p.joint_limit += over * over;
        p.joint_vel += joint_vel[j] * joint_vel[j];
        p.joint_acc += joint_acc[j] * joint_acc[j];
    }
    p
}

/// Raw ingredients for one step's total.
#[derive(Debug, Clone, Copy, Default)]
pub struct TermValues {
    pub nav_far: f64,
    pub nav_near: f64,
    pub path: f64,
    pub centering: f64,
    pub goal_reached: bool,
    pub penalties: RegPenalties,
    pub stall: f64,
}

/// Weighted total. Stage 1 consumes only navigation task terms, stage 2 only
/// centering/path; supplying the other stage's terms is an error.
pub fn total(values: &TermValues, cfg: &RewardConfig) -> Result<RewardTerms> {
    let w = &cfg.weights;
    let r_task = match cfg.stage {
        Stage::Stage1 => {
            if values.path != 0.0 || values.centering != 0.0 {
                return Err(Error::Rewards("stage 1 must not receive centering/path terms".into()));
            }
            w.nav_far * values.nav_far + w.nav_near * values.nav_near
        }
        Stage::Stage2 => {
            if values.nav_far != 0.0 || values.nav_near != 0.0 {
                return Err(Error::Rewards("stage 2 must not receive navigation terms".into()));
            }
            w.path * values.path + w.centering * values.centering
        }
    };
    let bonus = if values.goal_reached { w.goal_bonus } else { 0.0 };
    let p = &values.penalties;
    let reg = w.power * p.power
        + w.torque * p.torque
        + w.action_rate * p.action_rate
        + w.joint_limit * p.joint_limit
        + w.joint_vel * p.joint_vel
        + w.joint_acc * p.joint_acc;
    let stall = w.stall * values.stall;
    Ok(RewardTerms {
        nav_far: values.nav_far,
        nav_near: values.nav_near,
        path: values.path,
        centering: values.centering,
        goal_reached: values.goal_reached,
        power: p.power,
        torque: p.torque,
        action_rate: p.action_rate,
        joint_limit: p.joint_limit,
        joint_vel: p.joint_vel,
        joint_acc: p.joint_acc,
        stall: values.stall,
        total: r_task + bonus + reg + stall,
    })
}

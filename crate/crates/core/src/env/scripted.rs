//! Hand-scripted pure-pursuit walker.
//!
//! Follows the terrain centerline at full speed with proportional yaw
//! steering and a small lateral correction. Used as a success-oracle fixture
//! in tests and as a debugging baseline.

use super::{wrap_angle, SurrogateEnv};
use crate::net::ACTION_DIM;

#[derive(Debug, Clone)]
pub struct ScriptedWalker {
    pub lookahead: f64,
    pub yaw_gain: f64,
    pub lateral_gain: f64,
}

impl Default for ScriptedWalker {
    fn default() -> Self {
        ScriptedWalker { lookahead: 0.5, yaw_gain: 2.0, lateral_gain: 1.0 }
    }
}

impl ScriptedWalker {
    pub fn action(&self, env: &SurrogateEnv) -> [f64; ACTION_DIM] {
        let s = env.state();
        let hf = env.terrain();
        let (arc, lateral) = hf.centerline_progress(s.pos[0], s.pos[1]);
        let (tx, ty) = hf.centerline.point_at(arc + self.lookahead);
        let goal = hf.goal_pose;
        let goal_dist = ((goal.x - s.pos[0]).powi(2) + (goal.y - s.pos[1]).powi(2)).sqrt();

        // Near the end the pursuit point converges to the goal; steer onto the
        // goal heading for the yaw gate.
        let desired_yaw = if goal_dist < 2.0 * self.lookahead
            && (tx - s.pos[0]).abs() + (ty - s.pos[1]).abs() < 1e-6
        {
            goal.yaw
        } else {
            (ty - s.pos[1]).atan2(tx - s.pos[0])
        };
        let yaw_err = wrap_angle(desired_yaw - s.yaw);

        let forward = if yaw_err.abs() > 0.7 { 0.1 } else { 1.0 };
        let steer = (self.yaw_gain * yaw_err).clamp(-1.0, 1.0);
        let side = (-self.lateral_gain * lateral).clamp(-1.0, 1.0) * 0.5;

        let mut a = [0.0; ACTION_DIM];
        a[0..4].iter_mut().for_each(|v| *v = forward);
        a[4..8].iter_mut().for_each(|v| *v = side);
        a[8..12].iter_mut().for_each(|v| *v = steer);
        a
    }
}

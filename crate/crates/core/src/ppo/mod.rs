//! PPO machinery: rollout storage, generalized advantage estimation, the
//! clipped-surrogate loss with exact gradients, and an Adam optimizer.
//!
//! Gradient accumulation over a minibatch runs as a fixed binary tree over
//! fixed-size sample chunks, so the floating-point reduction order (and thus
//! the result) is identical for any worker count.

pub mod trainer;

use serde::{Deserialize, Serialize};

use crate::env::StepEvent;
use crate::error::Error;
use crate::net::{
    self, backward, block_range, forward, Block, PolicyParams, Scratch, Trace, ACTION_DIM,
    OBS_DIM, PARAM_COUNT,
};
use crate::Result;

/// PPO hyperparameters. Everything lives in the run config; nothing is a
/// code constant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PpoConfig {
    pub gamma: f64,
    pub gae_lambda: f64,
    pub clip: f64,
    pub epochs: usize,
    pub minibatches: usize,
    pub lr: f64,
    pub entropy_coef: f64,
    pub value_coef: f64,
    /// Steps collected per environment per iteration.
    pub rollout_steps: usize,
    pub n_env: usize,
    pub iterations: usize,
    pub checkpoint_every: usize,
}

impl Default for PpoConfig {
    fn default() -> Self {
        PpoConfig {
            gamma: 0.99,
            gae_lambda: 0.95,
            clip: 0.2,
            epochs: 5,
            minibatches: 4,
            lr: 3e-4,
            entropy_coef: 0.005,
            value_coef: 0.5,
            rollout_steps: 48,
            n_env: 256,
            iterations: 500,
            checkpoint_every: 100,
        }
    }
}

impl PpoConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return Err(Error::Config("gamma must be in (0, 1]".into()));
        }
        if !(0.0..=1.0).contains(&self.gae_lambda) {
            return Err(Error::Config("gae_lambda must be in [0, 1]".into()));
        }
        if self.clip <= 0.0 {
            return Err(Error::Config("clip must be > 0".into()));
        }
        if self.minibatches == 0 || self.epochs == 0 || self.n_env == 0 || self.rollout_steps == 0
        {
            return Err(Error::Config("epochs/minibatches/n_env/rollout_steps must be >= 1".into()));
        }
        Ok(())
    }
}

/// Generalized advantage estimation over one env's trajectory slice.
///
/// `delta_t = r_t + gamma * V_{t+1} * (1 - done_t) - V_t`, advantages follow
/// the `(gamma * lambda)`-discounted recursion gated by dones, and returns
/// are `A + V`. `bootstrap_value` stands in for `V_T` at rollout truncation.
pub fn compute_gae(
    rewards: &[f64],
    values: &[f64],
    dones: &[bool],
    bootstrap_value: f64,
    gamma: f64,
    lambda: f64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let t_len = rewards.len();
    if values.len() != t_len || dones.len() != t_len {
        return Err(Error::Train(format!(
            "gae length mismatch: rewards {t_len}, values {}, dones {}",
            values.len(),
            dones.len()
        )));
    }
    let mut advantages = vec![0.0; t_len];
    let mut returns = vec![0.0; t_len];
    let mut acc = 0.0;
    for t in (0..t_len).rev() {
        let not_done = if dones[t] { 0.0 } else { 1.0 };
        let next_value = if t + 1 < t_len { values[t + 1] } else { bootstrap_value };
        let delta = rewards[t] + gamma * next_value * not_done - values[t];
        acc = delta + gamma * lambda * not_done * acc;
        advantages[t] = acc;
        returns[t] = acc + values[t];
    }
    Ok((advantages, returns))
}

/// Normalize advantages to zero mean and unit std (population), eps 1e-8.
pub fn normalize_advantages(advantages: &mut [f64]) {
    let n = advantages.len() as f64;
    if n == 0.0 {
        return;
    }
    let mean = advantages.iter().sum::<f64>() / n;
    let var = advantages.iter().map(|a| (a - mean) * (a - mean)).sum::<f64>() / n;
    let std = var.sqrt();
    for a in advantages.iter_mut() {
        *a = (*a - mean) / (std + 1e-8);
    }
}

/// Flat rollout storage, step-major: the flat index of `(env, step)` is
/// `step * n_env + env`, so one step's envs are contiguous for parallel
/// collection.
#[derive(Debug, Clone)]
pub struct RolloutBatch {
    pub n_env: usize,
    pub steps: usize,
    pub obs: Vec<f64>,        // [steps * n_env * OBS_DIM]
    pub actions: Vec<f64>,    // [steps * n_env * ACTION_DIM]
    pub logp_old: Vec<f64>,   // [steps * n_env]
    pub rewards: Vec<f64>,
    pub values: Vec<f64>,
    pub dones: Vec<bool>,
    pub events: Vec<StepEvent>,
    pub advantages: Vec<f64>,
    pub returns: Vec<f64>,
}

impl RolloutBatch {
    pub fn new(n_env: usize, steps: usize) -> Self {
        let n = n_env * steps;
        RolloutBatch {
            n_env,
            steps,
            obs: vec![0.0; n * OBS_DIM],
            actions: vec![0.0; n * ACTION_DIM],
            logp_old: vec![0.0; n],
            rewards: vec![0.0; n],
            values: vec![0.0; n],
            dones: vec![false; n],
            events: vec![StepEvent::Running; n],
            advantages: vec![0.0; n],
            returns: vec![0.0; n],
        }
    }

    pub fn len(&self) -> usize {
        self.n_env * self.steps
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn flat_index(&self, env: usize, step: usize) -> usize {
        step * self.n_env + env
    }

    pub fn obs_at(&self, flat: usize) -> &[f64] {
        &self.obs[flat * OBS_DIM..(flat + 1) * OBS_DIM]
    }

    pub fn action_at(&self, flat: usize) -> &[f64] {
        &self.actions[flat * ACTION_DIM..(flat + 1) * ACTION_DIM]
    }

    /// Fill advantages/returns per env trajectory, then normalize advantages
    /// over the whole batch.
    pub fn finalize_advantages(
        &mut self,
        bootstrap_values: &[f64],
        gamma: f64,
        lambda: f64,
    ) -> Result<()> {
        if bootstrap_values.len() != self.n_env {
            return Err(Error::Train("bootstrap values length mismatch".into()));
        }
        let mut rewards = vec![0.0; self.steps];
        let mut values = vec![0.0; self.steps];
        let mut dones = vec![false; self.steps];
        for e in 0..self.n_env {
            for t in 0..self.steps {
                let i = self.flat_index(e, t);
                rewards[t] = self.rewards[i];
                values[t] = self.values[i];
                dones[t] = self.dones[i];
            }
            let (adv, ret) =
                compute_gae(&rewards, &values, &dones, bootstrap_values[e], gamma, lambda)?;
            for t in 0..self.steps {
                let i = self.flat_index(e, t);
                self.advantages[i] = adv[t];
                self.returns[i] = ret[t];
            }
        }
        normalize_advantages(&mut self.advantages);
        Ok(())
    }

    /// Sanity gate used before updates.
    pub fn check_finite(&self) -> Result<()> {
        for (name, slice) in [
            ("obs", &self.obs),
            ("actions", &self.actions),
            ("logp_old", &self.logp_old),
            ("rewards", &self.rewards),
            ("values", &self.values),
        ] {
            if slice.iter().any(|v| !v.is_finite()) {
                return Err(Error::Train(format!("non-finite {name} in rollout")));
            }
        }
        Ok(())
    }
}

/// Loss diagnostics for one minibatch update.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct LossStats {
    pub policy_loss: f64,
    pub value_loss: f64,
    pub entropy: f64,
    pub total_loss: f64,
}

struct ChunkResult {
    grad: Vec<f64>,
    policy_sum: f64,
    value_sum: f64,
    entropy_sum: f64,
}

impl ChunkResult {
    fn zero() -> Self {
        ChunkResult { grad: vec![0.0; PARAM_COUNT], policy_sum: 0.0, value_sum: 0.0, entropy_sum: 0.0 }
    }

    fn merge(mut self, rhs: ChunkResult) -> Self {
        for (a, b) in self.grad.iter_mut().zip(&rhs.grad) {
            *a += b;
        }
        self.policy_sum += rhs.policy_sum;
        self.value_sum += rhs.value_sum;
        self.entropy_sum += rhs.entropy_sum;
        self
    }
}

/// Samples per leaf of the gradient reduction tree. Fixed: the tree shape
/// must not depend on worker count.
const GRAD_CHUNK: usize = 64;

fn chunk_loss_grad(
    params: &PolicyParams,
    batch: &RolloutBatch,
    indices: &[usize],
    cfg: &PpoConfig,
    inv_m: f64,
) -> Result<ChunkResult> {
    let mut out = ChunkResult::zero();
    let mut trace = Trace::new();
    let mut scratch = Scratch::new();
    let log_std_range = block_range(Block::LogStd);

    for &i in indices {
        let obs = batch.obs_at(i);
        let net_out = forward(params, obs, &mut trace)?;
        let mut action = [0.0; ACTION_DIM];
        action.copy_from_slice(batch.action_at(i));
        let (logp_new, entropy) =
            net::log_prob_and_entropy(&net_out.action_mean, &net_out.action_std, &action);

        let adv = batch.advantages[i];
        let ratio = (logp_new - batch.logp_old[i]).exp();
        let clipped_ratio = ratio.clamp(1.0 - cfg.clip, 1.0 + cfg.clip);
        out.policy_sum += -(ratio * adv).min(clipped_ratio * adv);
        let clipped_out = (adv >= 0.0 && ratio > 1.0 + cfg.clip)
            || (adv < 0.0 && ratio < 1.0 - cfg.clip);
        let g_logp = if clipped_out { 0.0 } else { -adv * ratio * inv_m };

        let v_err = net_out.value - batch.returns[i];
        out.value_sum += v_err * v_err;
        let d_value = cfg.value_coef * 2.0 * v_err * inv_m;

        out.entropy_sum += entropy;

        let d_mu = net::d_log_prob_d_mean(&net_out.action_mean, &net_out.action_std, &action);
        let d_ls = net::d_log_prob_d_log_std(&net_out.action_mean, &net_out.action_std, &action);
        let mut d_mean = [0.0; ACTION_DIM];
        for j in 0..ACTION_DIM {
            d_mean[j] = g_logp * d_mu[j];
        }
        backward(params, &trace, &mut scratch, &d_mean, d_value, &mut out.grad)?;
        let ls_grad = &mut out.grad[log_std_range.clone()];
        for j in 0..ACTION_DIM {
            // Policy term through logp, entropy bonus directly.
            ls_grad[j] += g_logp * d_ls[j] - cfg.entropy_coef * inv_m;
        }
    }
    Ok(out)
}

fn tree_loss_grad(
    params: &PolicyParams,
    batch: &RolloutBatch,
    indices: &[usize],
    cfg: &PpoConfig,
    inv_m: f64,
) -> Result<ChunkResult> {
    if indices.len() <= GRAD_CHUNK {
        return chunk_loss_grad(params, batch, indices, cfg, inv_m);
    }
    let chunks = indices.len().div_ceil(GRAD_CHUNK);
    let mid = (chunks / 2) * GRAD_CHUNK;
    let (left, right) = indices.split_at(mid);
    let (l, r) = rayon::join(
        || tree_loss_grad(params, batch, left, cfg, inv_m),
        || tree_loss_grad(params, batch, right, cfg, inv_m),
    );
    Ok(l?.merge(r?))
}

/// Clipped-surrogate loss and its exact gradient over the given minibatch
/// sample indices. Advantages must already be normalized.
pub fn ppo_loss_and_grad(
    params: &PolicyParams,
    batch: &RolloutBatch,
    indices: &[usize],
    cfg: &PpoConfig,
) -> Result<(LossStats, Vec<f64>)> {
    if indices.is_empty() {
        return Err(Error::Train("empty minibatch".into()));
    }
    let inv_m = 1.0 / indices.len() as f64;
    let result = tree_loss_grad(params, batch, indices, cfg, inv_m)?;
    let stats = LossStats {
        policy_loss: result.policy_sum * inv_m,
        value_loss: result.value_sum * inv_m,
        entropy: result.entropy_sum * inv_m,
        total_loss: result.policy_sum * inv_m + cfg.value_coef * result.value_sum * inv_m
            - cfg.entropy_coef * result.entropy_sum * inv_m,
    };
    if !stats.total_loss.is_finite() {
        return Err(Error::Train(format!(
            "non-finite loss: policy {}, value {}, entropy {}",
            stats.policy_loss, stats.value_loss, stats.entropy
        )));
    }
    Ok((stats, result.grad))
}

/// First-order adaptive-moment optimizer over the flat parameter vector.
#[derive(Debug, Clone)]
pub struct Adam {
    lr: f64,
    beta1: f64,
    beta2: f64,
    eps: f64,
    m: Vec<f64>,
    v: Vec<f64>,
    t: u64,
}

impl Adam {
    pub fn new(lr: f64) -> Self {
        Adam { lr, beta1: 0.9, beta2: 0.999, eps: 1e-8, m: vec![0.0; PARAM_COUNT], v: vec![0.0; PARAM_COUNT], t: 0 }
    }

    pub fn step(&mut self, params: &mut PolicyParams, grad: &[f64]) {
        debug_assert_eq!(grad.len(), PARAM_COUNT);
        self.t += 1;
        let bc1 = 1.0 - self.beta1.powi(self.t as i32);
        let bc2 = 1.0 - self.beta2.powi(self.t as i32);
        let data = params.data_mut();
        for i in 0..PARAM_COUNT {
            let g = grad[i];
            self.m[i] = self.beta1 * self.m[i] + (1.0 - self.beta1) * g;
            self.v[i] = self.beta2 * self.v[i] + (1.0 - self.beta2) * g * g;
            let m_hat = self.m[i] / bc1;
            let v_hat = self.v[i] / bc2;
            data[i] -= self.lr * m_hat / (v_hat.sqrt() + self.eps);
        }
    }
}

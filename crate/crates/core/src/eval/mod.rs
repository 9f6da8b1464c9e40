//! Evaluation harness: goal-reached success rates, cross-terrain transfer
//! matrices, and critic-value heatmaps.
//!
//! Evaluation always runs the policy deterministically (actions = mean) over
//! seeded spawn jitters, so results are pure functions of
//! `(checkpoint, seed, n_episodes)`.

pub mod heatmap;

pub use heatmap::{cell_set_means, critic_heatmap, write_heatmap, HeatmapGrid, YawMode};

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::env::{EnvParams, StepEvent, SurrogateEnv};
use crate::error::Error;
use crate::net::{forward, PolicyParams, Trace, OBS_DIM};
use crate::rewards::{RewardConfig, Stage};
use crate::rng::{derive_seed, streams};
use crate::terrain::{difficulty_to_spec, generate, DifficultyLevel, HeightField, StairKind, TerrainMode, TerrainParams};
use crate::Result;

/// Success statistics for one `(terrain, level)` cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub terrain: StairKind,
    pub mode: TerrainMode,
    pub level: u32,
    pub episodes: usize,
    pub successes: usize,
    /// Percent in [0, 100].
    pub success_rate: f64,
}

/// Per-episode action source. Evaluation is deterministic: the net policy
/// acts at its mean.
pub trait EpisodePolicy {
    fn act(&mut self, env: &SurrogateEnv, obs: &[f64]) -> Result<[f64; 12]>;
}

/// Deterministic policy mode: actions are the actor means.
pub struct MeanPolicy<'a> {
    params: &'a PolicyParams,
    trace: Trace,
}

impl<'a> MeanPolicy<'a> {
    pub fn new(params: &'a PolicyParams) -> Self {
        MeanPolicy { params, trace: Trace::new() }
    }
}

impl EpisodePolicy for MeanPolicy<'_> {
    fn act(&mut self, _env: &SurrogateEnv, obs: &[f64]) -> Result<[f64; 12]> {
        Ok(forward(self.params, obs, &mut self.trace)?.action_mean)
    }
}

impl EpisodePolicy for crate::env::scripted::ScriptedWalker {
    fn act(&mut self, env: &SurrogateEnv, _obs: &[f64]) -> Result<[f64; 12]> {
        Ok(self.action(env))
    }
}

/// Run `n_episodes` deterministic-policy episodes on one terrain level.
#[allow(clippy::too_many_arguments)]
pub fn success_rate(
    params: &PolicyParams,
    kind: StairKind,
    level: u32,
    mode: TerrainMode,
    n_episodes: usize,
    seed: u64,
    env_params: &EnvParams,
    terrain_params: &TerrainParams,
    dump_dir: Option<&Path>,
) -> Result<EvalReport> {
    success_rate_with(
        |_| MeanPolicy::new(params),
        kind,
        level,
        mode,
        n_episodes,
        seed,
        env_params,
        terrain_params,
        dump_dir,
    )
}

/// [`success_rate`] with an arbitrary per-episode policy factory (scripted
/// oracles, ablations).
#[allow(clippy::too_many_arguments)]
pub fn success_rate_with<P, F>(
    make_policy: F,
    kind: StairKind,
    level: u32,
    mode: TerrainMode,
    n_episodes: usize,
    seed: u64,
    env_params: &EnvParams,
    terrain_params: &TerrainParams,
    dump_dir: Option<&Path>,
) -> Result<EvalReport>
where
    P: EpisodePolicy,
    F: Fn(usize) -> P + Sync,
{
    if n_episodes == 0 {
        return Err(Error::Env("n_episodes must be >= 1".into()));
    }
    let spec = difficulty_to_spec(kind, DifficultyLevel(level), mode, terrain_params)?;
    let hf = Arc::new(generate(&spec, seed, terrain_params)?);
    if let Some(dir) = dump_dir {
        fs::create_dir_all(dir)?;
    }

    let successes: Vec<Result<bool>> = (0..n_episodes)
        .into_par_iter()
        .map(|ep| {
            let mut policy = make_policy(ep);
            run_episode(&mut policy, &hf, level, seed, ep, env_params, dump_dir)
        })
        .collect();
    let mut count = 0usize;
    for s in successes {
        if s? {
            count += 1;
        }
    }
    Ok(EvalReport {
        terrain: kind,
        mode,
        level,
        episodes: n_episodes,
        successes: count,
        success_rate: 100.0 * count as f64 / n_episodes as f64,
    })
}

fn run_episode<P: EpisodePolicy>(
    policy: &mut P,
    hf: &Arc<HeightField>,
    level: u32,
    seed: u64,
    episode: usize,
    env_params: &EnvParams,
    dump_dir: Option<&Path>,
) -> Result<bool> {
    // Reward stage does not affect event outcomes; stage 2 keeps the
    // centerline machinery exercised and the stall term meaningful in dumps.
    let reward_cfg = RewardConfig { stage: Stage::Stage2, ..Default::default() };
    let mut env = SurrogateEnv::new(episode, hf.clone(), level, env_params.clone(), reward_cfg);
    let mut obs = vec![0.0; OBS_DIM];
    let ep_seed = derive_seed(seed, streams::EVAL_EPISODE, episode as u64);
    env.reset(hf.clone(), level, ep_seed, &mut obs);

    let mut rows: Vec<String> = Vec::new();
    let mut success = false;
    for t in 0..env_params.timeout_steps {
        let action = policy.act(&env, &obs)?;
        let step = env.step(&action, &mut obs)?;
        if dump_dir.is_some() {
            let s = env.state();
            rows.push(format!(
                "{},{:.4},{:.4},{:.4},{:.4},{:.4},{}",
                t,
                s.pos[0],
                s.pos[1],
                s.pos[2],
                s.yaw,
                step.speed,
                step.event.as_str()
            ));
        }
        if step.event.is_terminal() {
            success = step.event == StepEvent::GoalReached;
            break;
        }
    }
    if let Some(dir) = dump_dir {
        let path = dir.join(format!("episode_{episode:04}.csv"));
        let mut f = fs::File::create(path)?;
        writeln!(f, "t,x,y,z,yaw,speed,event")?;
        for row in rows {
            writeln!(f, "{row}")?;
        }
    }
    Ok(success)
}

/// Sweep one terrain across several levels; one report per level.
#[allow(clippy::too_many_arguments)]
pub fn eval_levels(
    params: &PolicyParams,
    kind: StairKind,
    levels: &[u32],
    mode: TerrainMode,
    n_episodes: usize,
    seed: u64,
    env_params: &EnvParams,
    terrain_params: &TerrainParams,
    dump_dir: Option<&Path>,
) -> Result<Vec<EvalReport>> {
    levels
        .iter()
        .map(|l| {
            let dump = dump_dir.map(|d| d.join(format!("level_{l}")));
            success_rate(
                params,
                kind,
                *l,
                mode,
                n_episodes,
                seed,
                env_params,
                terrain_params,
                dump.as_deref(),
            )
        })
        .collect()
}

/// Write the level sweep as CSV (one row per level).
pub fn write_eval_csv(reports: &[EvalReport], path: &Path) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir)?;
        }
    }
    let mut f = fs::File::create(path)?;
    writeln!(f, "terrain,mode,level,episodes,successes,success_rate")?;
    for r in reports {
        writeln!(
            f,
            "{},{},{},{},{},{:.2}",
            r.terrain,
            r.mode.as_str(),
            r.level,
            r.episodes,
            r.successes,
            r.success_rate
        )?;
    }
    Ok(())
}

/// Mean of the level-3 and level-4 success rates, percent.
pub fn total_success(s_level3: f64, s_level4: f64) -> f64 {
    (s_level3 + s_level4) / 2.0
}

/// Transferred-over-target success ratio, percent. `None` when the target
/// rate is zero (reported as N/A, like the matrix diagonal).
pub fn transferability(s_transfer: f64, s_target_trained: f64) -> Option<f64> {
    if s_target_trained > 0.0 {
        Some(100.0 * s_transfer / s_target_trained)
    } else {
        None
    }
}

/// One checkpointed policy entering the transfer matrix.
pub struct TransferModel {
    pub name: String,
    pub params: PolicyParams,
    /// Terrain the model was trained on (from its checkpoint manifest).
    pub trained_kind: Option<StairKind>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransferRow {
    pub model: String,
    pub terrain: StairKind,
    pub s_level3: f64,
    pub s_level4: f64,
    pub total: f64,
    /// None on the diagonal, or when the terrain has no own-trained model in
    /// the matrix, or when that model's own rate is zero.
    pub transferability: Option<f64>,
}

/// Evaluate every model on every terrain at test levels 3 and 4.
///
/// Transferability compares each transferred model against the target
/// terrain's own-trained model within the same matrix; diagonal rows are N/A.
#[allow(clippy::too_many_arguments)]
pub fn cross_matrix(
    models: &[TransferModel],
    terrains: &[StairKind],
    n_episodes: usize,
    seed: u64,
    env_params: &EnvParams,
    terrain_params: &TerrainParams,
) -> Result<Vec<TransferRow>> {
    const LEVELS: [u32; 2] = [3, 4];
    let mut rates = vec![vec![(0.0f64, 0.0f64); terrains.len()]; models.len()];
    for (mi, model) in models.iter().enumerate() {
        for (ti, terrain) in terrains.iter().enumerate() {
            let mut pair = [0.0; 2];
            for (k, level) in LEVELS.iter().enumerate() {
                pair[k] = success_rate(
                    &model.params,
                    *terrain,
                    *level,
                    TerrainMode::Test,
                    n_episodes,
                    seed,
                    env_params,
                    terrain_params,
                    None,
                )?
                .success_rate;
            }
            rates[mi][ti] = (pair[0], pair[1]);
        }
    }
    let names: Vec<String> = models.iter().map(|m| m.name.clone()).collect();
    let trained: Vec<Option<StairKind>> = models.iter().map(|m| m.trained_kind).collect();
    Ok(derive_matrix_rows(&names, &trained, terrains, &rates))
}

/// Pure derivation of matrix rows from measured per-level rates; split out so
/// the table arithmetic is testable against published numbers.
pub fn derive_matrix_rows(
    model_names: &[String],
    trained_kinds: &[Option<StairKind>],
    terrains: &[StairKind],
    rates: &[Vec<(f64, f64)>],
) -> Vec<TransferRow> {
    let own_total = |ti: usize, terrain: StairKind| -> Option<f64> {
        trained_kinds
            .iter()
            .position(|k| *k == Some(terrain))
            .map(|mi| total_success(rates[mi][ti].0, rates[mi][ti].1))
    };
    let mut rows = Vec::new();
    for mi in 0..model_names.len() {
        for (ti, terrain) in terrains.iter().enumerate() {
            let (s3, s4) = rates[mi][ti];
            let total = total_success(s3, s4);
            let transfer = if trained_kinds[mi] == Some(*terrain) {
                None // diagonal: the model on its own terrain
            } else {
                own_total(ti, *terrain).and_then(|own| transferability(total, own))
            };
            rows.push(TransferRow {
                model: model_names[mi].clone(),
                terrain: *terrain,
                s_level3: s3,
                s_level4: s4,
                total,
                transferability: transfer,
            });
        }
    }
    rows
}

/// Emit the matrix in the tables' column layout.
pub fn write_transfer_csv(rows: &[TransferRow], path: &Path) -> Result<PathBuf> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir)?;
        }
    }
    let mut f = fs::File::create(path)?;
    writeln!(f, "model,terrain,s_level3,s_level4,total,transferability")?;
    for r in rows {
        let t = r
            .transferability
            .map(|v| format!("{v:.2}"))
            .unwrap_or_else(|| "N/A".to_string());
        writeln!(
            f,
            "{},{},{:.2},{:.2},{:.2},{}",
            r.model, r.terrain, r.s_level3, r.s_level4, r.total, t
        )?;
    }
    Ok(path.to_path_buf())
}

#[cfg(test)]
mod tests;

//! On-policy training loop.
//!
//! Per iteration: collect a vectorized rollout, bootstrap from the critic at
//! truncation, compute GAE, run `epochs x minibatches` clipped-surrogate
//! updates, and apply curriculum updates at episode ends. Deterministic under
//! a fixed seed: env stepping, action sampling, shuffling, and gradient
//! reduction are all worker-count independent, so metrics and checkpoints
//! are byte-identical for any `--workers` value.

use std::collections::VecDeque;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use rand::seq::SliceRandom;
use rayon::prelude::*;

use super::{ppo_loss_and_grad, Adam, LossStats, RolloutBatch};
use crate::config::RunConfig;
use crate::curriculum::{CurriculumState, MAX_LEVEL};
use crate::env::{StepEvent, SurrogateEnv, VecEnv};
use crate::error::Error;
use crate::net::{
    self, checkpoint::save_checkpoint, checkpoint::load_checkpoint, checkpoint::CheckpointMeta,
    forward, PolicyParams, Trace, ACTION_DIM, OBS_DIM,
};
use crate::rewards::{RewardTerms, Stage};
use crate::rng::{derive_seed, seeded_rng, streams};
use crate::terrain::{StairKind, TerrainSet};
use crate::Result;

/// Episodes kept in the trailing success/return window.
const EPISODE_WINDOW: usize = 200;

/// Summary of a finished training run.
#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub iterations_run: usize,
    pub final_params: PolicyParams,
    pub metrics_path: PathBuf,
    pub final_checkpoint_stem: PathBuf,
    /// Success rate over the trailing episode window at the end of training.
    pub success_window_rate: f64,
    /// Fraction of all collected timesteps with horizontal speed below the
    /// stall threshold outside the goal region.
    pub stall_fraction: f64,
    pub episodes_total: u64,
}

/// Train per the config; `workers` bounds the rayon pool (default: all cores).
pub fn train(
    cfg: &RunConfig,
    warm_start: Option<&Path>,
    workers: Option<usize>,
) -> Result<TrainOutcome> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.unwrap_or(0))
        .build()
        .map_err(|e| Error::Train(format!("thread pool: {e}")))?;
    pool.install(|| train_inner(cfg, warm_start))
}

fn effective_kind(cfg: &RunConfig) -> StairKind {
    match cfg.stage {
        Stage::Stage1 => StairKind::Pyramid,
        Stage::Stage2 => cfg.terrain.kind,
    }
}

fn train_inner(cfg: &RunConfig, warm_start: Option<&Path>) -> Result<TrainOutcome> {
    cfg.validate()?;
    let out_dir = PathBuf::from(&cfg.out_dir);
    fs::create_dir_all(&out_dir)?;
    cfg.write_resolved(&out_dir)?;

    let kind = effective_kind(cfg);
    let terrains = TerrainSet::generate_all(kind, cfg.terrain.mode, &cfg.terrain_params, cfg.seed)?;

    let mut params = match warm_start {
        Some(path) => load_checkpoint(path)?.0,
        None => {
            if cfg.stage == Stage::Stage2 {
                eprintln!("warning: stage2 without a warm-start checkpoint; training from scratch");
            }
            PolicyParams::init(cfg.seed)
        }
    };
    let mut adam = Adam::new(cfg.ppo.lr);
    let mut curriculum = CurriculumState::new(cfg.ppo.n_env, &cfg.curriculum, cfg.seed)?;

    let n_env = cfg.ppo.n_env;
    let steps = cfg.ppo.rollout_steps;
    let mut vec_env = VecEnv::new(
        (0..n_env)
            .map(|e| {
                let level = curriculum.level_of(e);
                terrains
                    .level(level)
                    .map(|hf| SurrogateEnv::new(e, hf, level, cfg.env.clone(), cfg.rewards.clone()))
            })
            .collect::<Result<Vec<_>>>()?,
    );

    let mut obs_buf = vec![0.0; n_env * OBS_DIM];
    let mut episode_counters = vec![0u64; n_env];
    {
        let levels: Vec<u32> = (0..n_env).map(|e| curriculum.level_of(e)).collect();
        let fields: Vec<Arc<_>> =
            levels.iter().map(|l| terrains.level(*l)).collect::<Result<_>>()?;
        let seed0 = derive_seed(cfg.seed, streams::EPISODE, 0);
        vec_env.reset_all(&fields, &levels, seed0, &mut obs_buf)?;
    }

    let mut batch = RolloutBatch::new(n_env, steps);
    let mut sample_rngs: Vec<_> =
        (0..n_env).map(|e| seeded_rng(cfg.seed, streams::ACTION_SAMPLE, e as u64)).collect();
    let mut shuffle_rng = seeded_rng(cfg.seed, streams::MINIBATCH_SHUFFLE, 0);

    let metrics_path = out_dir.join("metrics.csv");
    let mut metrics = fs::File::create(&metrics_path)?;
    writeln!(
        metrics,
        "iteration,steps,episodes,successes,success_rate,mean_return,mean_level,stall_fraction,policy_loss,value_loss,entropy,total_loss,{},{}",
        RewardTerms::CSV_HEADER,
        (1..=MAX_LEVEL).map(|l| format!("lvl_{l}")).collect::<Vec<_>>().join(",")
    )?;
    let timing_path = out_dir.join("timing.csv");
    let mut timing = fs::File::create(&timing_path)?;
    writeln!(timing, "iteration,wall_ms")?;

    let mut window: VecDeque<(bool, f64)> = VecDeque::with_capacity(EPISODE_WINDOW);
    let mut return_acc = vec![0.0f64; n_env];
    let mut episodes_total = 0u64;
    let mut stalled_steps_total = 0u64;
    let mut steps_total = 0u64;

    let stage_name = cfg.stage.as_str();
    let mut iterations_run = 0;

    for iteration in 0..cfg.ppo.iterations {
        let iter_start = Instant::now();
        let mut episodes_iter = 0u64;
        let mut successes_iter = 0u64;
        let mut stalled_iter = 0u64;
        let mut term_sums = [0.0f64; 11];

        let action_std = params.action_std();
        for t in 0..steps {
            let slab = t * n_env;
            batch.obs[slab * OBS_DIM..(slab + n_env) * OBS_DIM].copy_from_slice(&obs_buf);

            // Policy forward + action sampling, each env into its own slot.
            {
                let obs_slab = &batch.obs[slab * OBS_DIM..(slab + n_env) * OBS_DIM];
                let act_slab = &mut batch.actions[slab * ACTION_DIM..(slab + n_env) * ACTION_DIM];
                let logp_slab = &mut batch.logp_old[slab..slab + n_env];
                let val_slab = &mut batch.values[slab..slab + n_env];
                act_slab
                    .par_chunks_mut(ACTION_DIM)
                    .zip(logp_slab.par_iter_mut())
                    .zip(val_slab.par_iter_mut())
                    .zip(sample_rngs.par_iter_mut())
                    .enumerate()
                    .try_for_each_init(
                        Trace::new,
                        |trace, (e, (((act, logp), val), rng))| -> Result<()> {
                            let obs = &obs_slab[e * OBS_DIM..(e + 1) * OBS_DIM];
                            let out = forward(&params, obs, trace)?;
                            let a = net::sample_action(&out.action_mean, &action_std, rng);
                            act.copy_from_slice(&a);
                            *logp =
                                net::log_prob_and_entropy(&out.action_mean, &action_std, &a).0;
                            *val = out.value;
                            Ok(())
                        },
                    )?;
            }

            let outcomes = {
                let act_slab = &batch.actions[slab * ACTION_DIM..(slab + n_env) * ACTION_DIM];
                vec_env.step_batch(act_slab, &mut obs_buf)?
            };

            // Bookkeeping and episode boundaries, in fixed env order.
            for (e, out) in outcomes.iter().enumerate() {
                let i = slab + e;
                batch.rewards[i] = out.terms.total;
                batch.dones[i] = out.event.is_terminal();
                batch.events[i] = out.event;
                return_acc[e] += out.terms.total;
                let row = out.terms.as_log_row();
                for (s, v) in term_sums.iter_mut().zip(row) {
                    *s += v;
                }
                if out.speed < vec_env.env(e).reward_config().stall_speed_threshold
                    && !out.in_goal_region
                {
                    stalled_iter += 1;
                }
                if out.event.is_terminal() {
                    episodes_iter += 1;
                    episodes_total += 1;
                    let success = out.event == StepEvent::GoalReached;
                    if success {
                        successes_iter += 1;
                    }
                    if window.len() == EPISODE_WINDOW {
                        window.pop_front();
                    }
                    window.push_back((success, return_acc[e]));
                    return_acc[e] = 0.0;

                    let new_level = curriculum.update(e, out.event)?;
                    episode_counters[e] += 1;
                    let ep_seed =
                        derive_seed(cfg.seed, streams::EPISODE, episode_counters[e]);
                    let hf = terrains.level(new_level)?;
                    vec_env.env_mut(e).reset(
                        hf,
                        new_level,
                        ep_seed,
                        &mut obs_buf[e * OBS_DIM..(e + 1) * OBS_DIM],
                    );
                }
            }
        }
        steps_total += (steps * n_env) as u64;
        stalled_steps_total += stalled_iter;

        // Bootstrap values at truncation.
        let mut bootstrap = vec![0.0f64; n_env];
        bootstrap
            .par_iter_mut()
            .enumerate()
            .try_for_each_init(Trace::new, |trace, (e, b)| -> Result<()> {
                let obs = &obs_buf[e * OBS_DIM..(e + 1) * OBS_DIM];
                *b = forward(&params, obs, trace)?.value;
                Ok(())
            })?;

        batch.check_finite().map_err(|e| {
            Error::Train(format!("iteration {iteration}: {e}; aborting before update"))
        })?;
        batch.finalize_advantages(&bootstrap, cfg.ppo.gamma, cfg.ppo.gae_lambda)?;

        // Clipped-surrogate updates.
        let total_samples = batch.len();
        let mb_size = total_samples.div_ceil(cfg.ppo.minibatches);
        let mut perm: Vec<usize> = (0..total_samples).collect();
        let mut loss_acc = LossStats::default();
        let mut updates = 0usize;
        for _epoch in 0..cfg.ppo.epochs {
            perm.shuffle(&mut shuffle_rng);
            for mb in perm.chunks(mb_size) {
                let (stats, grad) = ppo_loss_and_grad(&params, &batch, mb, &cfg.ppo)
                    .map_err(|e| Error::Train(format!("iteration {iteration}: {e}")))?;
                adam.step(&mut params, &grad);
                loss_acc.policy_loss += stats.policy_loss;
                loss_acc.value_loss += stats.value_loss;
                loss_acc.entropy += stats.entropy;
                loss_acc.total_loss += stats.total_loss;
                updates += 1;
            }
        }
        let inv_u = 1.0 / updates.max(1) as f64;

        // Metrics row (all deterministic quantities).
        let success_rate = if window.is_empty() {
            0.0
        } else {
            window.iter().filter(|(s, _)| *s).count() as f64 / window.len() as f64
        };
        let mean_return = if window.is_empty() {
            0.0
        } else {
            window.iter().map(|(_, r)| r).sum::<f64>() / window.len() as f64
        };
        let stall_fraction = stalled_iter as f64 / (steps * n_env) as f64;
        let inv_steps = 1.0 / (steps * n_env) as f64;
        let hist = curriculum.level_histogram();
        writeln!(
            metrics,
            "{},{},{},{},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{},{}",
            iteration,
            steps * n_env,
            episodes_iter,
            successes_iter,
            success_rate,
            mean_return,
            curriculum.mean_level(),
            stall_fraction,
            loss_acc.policy_loss * inv_u,
            loss_acc.value_loss * inv_u,
            loss_acc.entropy * inv_u,
            loss_acc.total_loss * inv_u,
            term_sums
                .iter()
                .map(|s| format!("{:.6}", s * inv_steps))
                .collect::<Vec<_>>()
                .join(","),
            hist.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(",")
        )?;
        writeln!(timing, "{},{}", iteration, iter_start.elapsed().as_millis())?;

        iterations_run = iteration + 1;
        if cfg.ppo.checkpoint_every > 0 && iterations_run % cfg.ppo.checkpoint_every == 0 {
            let stem = out_dir.join(format!("ckpt_{stage_name}_iter{iterations_run:06}"));
            save_checkpoint(&stem, &params, &meta(cfg, iterations_run as u64))?;
        }
    }

    let final_stem = out_dir.join(format!("ckpt_{stage_name}_final"));
    save_checkpoint(&final_stem, &params, &meta(cfg, iterations_run as u64))?;
    metrics.flush()?;
    timing.flush()?;

    let success_window_rate = if window.is_empty() {
        0.0
    } else {
        window.iter().filter(|(s, _)| *s).count() as f64 / window.len() as f64
    };
    Ok(TrainOutcome {
        iterations_run,
        final_params: params,
        metrics_path,
        final_checkpoint_stem: final_stem,
        success_window_rate,
        stall_fraction: if steps_total == 0 {
            0.0
        } else {
            stalled_steps_total as f64 / steps_total as f64
        },
        episodes_total,
    })
}

fn meta(cfg: &RunConfig, iteration: u64) -> CheckpointMeta {
    CheckpointMeta {
        stage: cfg.stage,
        seed: cfg.seed,
        iteration,
        terrain_kind: Some(effective_kind(cfg)),
    }
}

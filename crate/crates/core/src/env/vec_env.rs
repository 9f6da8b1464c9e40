//! Batched env stepping.
//!
//! Envs fan out across rayon workers; each env writes only its own slot, so
//! results are bit-identical for any worker count.

use rayon::prelude::*;
use std::sync::Arc;

use super::{StepOutcome, SurrogateEnv};
use crate::error::Error;
use crate::net::{ACTION_DIM, OBS_DIM};
use crate::terrain::HeightField;
use crate::Result;

pub type StepResult = StepOutcome;

pub struct VecEnv {
    envs: Vec<SurrogateEnv>,
}

impl VecEnv {
    pub fn new(envs: Vec<SurrogateEnv>) -> Self {
        VecEnv { envs }
    }

    pub fn len(&self) -> usize {
        self.envs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.envs.is_empty()
    }

    pub fn env(&self, i: usize) -> &SurrogateEnv {
        &self.envs[i]
    }

    pub fn env_mut(&mut self, i: usize) -> &mut SurrogateEnv {
        &mut self.envs[i]
    }

    /// Reset every env with per-env seeds; observations land in `obs`
    /// (`n * OBS_DIM` values).
    pub fn reset_all(
        &mut self,
        terrains: &[Arc<HeightField>],
        levels: &[u32],
        seed: u64,
        obs: &mut [f64],
    ) -> Result<()> {
        if terrains.len() != self.envs.len() || levels.len() != self.envs.len() {
            return Err(Error::Env("reset batch size mismatch".into()));
        }
        if obs.len() != self.envs.len() * OBS_DIM {
            return Err(Error::Env("observation buffer size mismatch".into()));
        }
        self.envs
            .par_iter_mut()
            .zip(terrains.par_iter())
            .zip(levels.par_iter())
            .zip(obs.par_chunks_mut(OBS_DIM))
            .for_each(|(((env, terrain), level), o)| {
                env.reset(terrain.clone(), *level, seed, o);
            });
        Ok(())
    }

    /// Step every env with its action slice (`n * ACTION_DIM` values); next
    /// observations land in `obs`.
    pub fn step_batch(&mut self, actions: &[f64], obs: &mut [f64]) -> Result<Vec<StepOutcome>> {
        if actions.len() != self.envs.len() * ACTION_DIM {
            return Err(Error::Env(format!(
                "batch size mismatch: {} action values for {} envs",
                actions.len(),
                self.envs.len()
            )));
        }
        if obs.len() != self.envs.len() * OBS_DIM {
            return Err(Error::Env("observation buffer size mismatch".into()));
        }
        self.envs
            .par_iter_mut()
            .zip(actions.par_chunks(ACTION_DIM))
            .zip(obs.par_chunks_mut(OBS_DIM))
            .map(|((env, a), o)| {
                let mut arr = [0.0; ACTION_DIM];
                arr.copy_from_slice(a);
                env.step(&arr, o)
            })
            .collect()
    }
}

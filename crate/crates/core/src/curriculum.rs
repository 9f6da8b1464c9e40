//! Terrain-difficulty curriculum.
//!
//! Ten levels. An agent that reaches its goal is promoted one level; one that
//! finishes the top level is reassigned to a uniformly random level to keep
//! earlier terrains in the training distribution; any failure (fall, exit,
//! timeout) demotes one level. Agents update independently.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::env::StepEvent;
use crate::error::Error;
use crate::rng::{seeded_rng, streams};
use crate::Result;

pub const MAX_LEVEL: u32 = 10;

/// Curriculum toggles carried in the run config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CurriculumConfig {
    /// When false, every agent stays on `initial_level` forever.
    pub enabled: bool,
    pub initial_level: u32,
}

impl Default for CurriculumConfig {
    fn default() -> Self {
        CurriculumConfig { enabled: true, initial_level: 1 }
    }
}

/// The promote/demote/random-reassignment rule for one terminal outcome.
pub fn update_level(level: u32, outcome: StepEvent, rng: &mut ChaCha8Rng) -> Result<u32> {
    if !(1..=MAX_LEVEL).contains(&level) {
        return Err(Error::Curriculum(format!("level {level} out of range")));
    }
    match outcome {
        StepEvent::Running => Err(Error::Curriculum("update on a non-terminal outcome".into())),
        StepEvent::GoalReached => {
            if level < MAX_LEVEL {
                Ok(level + 1)
            } else {
                Ok(rng.gen_range(1..=MAX_LEVEL))
            }
        }
        StepEvent::Fell | StepEvent::OutOfBounds | StepEvent::Timeout => Ok(level.max(2) - 1),
    }
}

/// Per-agent level tracking with population counters.
#[derive(Debug, Clone)]
pub struct CurriculumState {
    levels: Vec<u32>,
    counts: [usize; MAX_LEVEL as usize],
    rng: ChaCha8Rng,
    enabled: bool,
}

impl CurriculumState {
    pub fn new(n_agents: usize, cfg: &CurriculumConfig, seed: u64) -> Result<Self> {
        if !(1..=MAX_LEVEL).contains(&cfg.initial_level) {
            return Err(Error::Curriculum(format!(
                "initial_level {} out of range 1..={MAX_LEVEL}",
                cfg.initial_level
            )));
        }
        let mut counts = [0usize; MAX_LEVEL as usize];
        counts[(cfg.initial_level - 1) as usize] = n_agents;
        Ok(CurriculumState {
            levels: vec![cfg.initial_level; n_agents],
            counts,
            rng: seeded_rng(seed, streams::CURRICULUM, 0),
            enabled: cfg.enabled,
        })
    }

    pub fn level_of(&self, agent: usize) -> u32 {
        self.levels[agent]
    }

    /// Apply the rule for one agent's terminal outcome; returns the new level.
    ///
    /// Callers must apply updates in a fixed agent order so random
    /// reassignments draw from the stream deterministically.
    pub fn update(&mut self, agent: usize, outcome: StepEvent) -> Result<u32> {
        let old = self.levels[agent];
        let new = if self.enabled { update_level(old, outcome, &mut self.rng)? } else { old };
        self.levels[agent] = new;
        self.counts[(old - 1) as usize] -= 1;
        self.counts[(new - 1) as usize] += 1;
        Ok(new)
    }

    /// Exact population per level, index 0 = level 1.
    pub fn level_histogram(&self) -> [usize; MAX_LEVEL as usize] {
        self.counts
    }

    /// Mean level across agents.
    pub fn mean_level(&self) -> f64 {
        if self.levels.is_empty() {
            return 0.0;
        }
        self.levels.iter().map(|l| *l as f64).sum::<f64>() / self.levels.len() as f64
    }
}
